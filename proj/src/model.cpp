#include "mbt/model.hpp"

namespace mbt {

const PortDecl* Component::find_port(const std::string& n) const {
  for (const auto& p : ports)
    if (p.name == n) return &p;
  return nullptr;
}

const TypeDef* Model::find_type(const std::string& n) const {
  for (const auto& t : types)
    if (t.name == n) return &t;
  return nullptr;
}

const FuncDef* Model::find_function(const std::string& n) const {
  for (const auto& f : functions)
    if (f.name == n) return &f;
  return nullptr;
}

const Component* Model::find_component(const std::string& n) const {
  for (const auto& c : components)
    if (c.name == n) return &c;
  return nullptr;
}

Signature build_signature(const Model& m) {
  Signature sig;
  for (const auto& t : m.types) {
    sig.types.emplace(t.name, &t);
    int tag = 0;
    for (const auto& c : t.ctors) sig.ctors.emplace(c.name, CtorInfo{&t, &c, tag++});
  }
  for (const auto& f : m.functions) sig.functions.emplace(f.name, &f);
  return sig;
}

bool value_has_type(const Value& v, const TypeRef& type, const Signature& sig) {
  switch (v.kind()) {
    case Value::Kind::Absent:
      return false;
    case Value::Kind::Bool:
      return type.is_bool();
    case Value::Kind::Int:
      return type.is_int();
    case Value::Kind::Con: {
      if (type.kind != TypeRef::Kind::Named) return false;
      const CtorInfo* info = sig.find_ctor(v.con_name());
      if (!info || info->owner->name != type.name) return false;
      const auto& args = v.con_args();
      if (args.size() != info->ctor->arg_types.size()) return false;
      for (size_t i = 0; i < args.size(); ++i)
        if (!value_has_type(args[i], info->ctor->arg_types[i], sig)) return false;
      return true;
    }
  }
  return false;
}

}  // namespace mbt
