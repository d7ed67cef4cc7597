#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mbt/ast.hpp"

namespace mbt {

// ---------------------------------------------------------------------------
// Component structure

enum class PortDir { In, Out };

struct PortDecl {
  std::string name;
  PortDir dir = PortDir::In;
  TypeRef type;
  SourceLocation loc;
};

struct LocalDecl {
  std::string name;
  TypeRef type;
  ExprPtr init;  // constant expression, evaluated at elaboration
  SourceLocation loc;
};

// One guarded transition of an EFSM:
//   trans Src -> Dst when p=pat, q=pat if guard then out=e, ... set x := e, ...
struct Transition {
  std::string source;
  std::string target;
  std::vector<std::pair<std::string, Pattern>> triggers;  // input port -> pattern
  ExprPtr guard;  // never null after parse (defaults to literal true)
  std::vector<std::pair<std::string, ExprPtr>> outputs;      // output port -> expr
  std::vector<std::pair<std::string, ExprPtr>> assignments;  // local -> expr
  SourceLocation loc;
  int index = 0;  // position within owning component, assigned at elaboration
};

struct Efsm {
  std::vector<std::string> states;
  std::string initial;
  std::vector<LocalDecl> locals;
  std::vector<Transition> transitions;
};

// Wiring inside a composite component. An endpoint is either a port of the
// composite itself (`sub` empty) or a port of a named subcomponent.
struct Endpoint {
  std::string sub;   // empty = enclosing component boundary
  std::string port;
  std::string str() const { return sub.empty() ? port : sub + "." + port; }
  friend bool operator==(const Endpoint& a, const Endpoint& b) {
    return a.sub == b.sub && a.port == b.port;
  }
};

struct ChannelDecl {
  std::string name;
  Endpoint from;
  Endpoint to;
  bool delayed = false;  // one-tick buffer; breaks causality cycles
  SourceLocation loc;
};

struct SubDecl {
  std::string name;       // instance name
  std::string component;  // component type name
  SourceLocation loc;
};

// A component is either atomic (carries an EFSM) or composite (subcomponents
// plus channels). `concrete` marks implementation-side components that only
// exist in an SUT model; coverage reports keep them separate.
struct Component {
  std::string name;
  bool concrete = false;
  std::vector<PortDecl> ports;
  std::optional<Efsm> efsm;
  std::vector<SubDecl> subs;
  std::vector<ChannelDecl> channels;
  SourceLocation loc;

  bool atomic() const { return efsm.has_value(); }
  const PortDecl* find_port(const std::string& n) const;
};

struct Model {
  std::string name;
  std::vector<TypeDef> types;
  std::vector<FuncDef> functions;
  std::vector<Component> components;
  std::string root;  // name of the root component

  const TypeDef* find_type(const std::string& n) const;
  const FuncDef* find_function(const std::string& n) const;
  const Component* find_component(const std::string& n) const;
};

// ---------------------------------------------------------------------------
// Signature: name-resolution tables derived from a model's type and function
// definitions. Built during validation, reused by eval, typecheck, testgen.

struct CtorInfo {
  const TypeDef* owner = nullptr;
  const TypeDef::Ctor* ctor = nullptr;
  int tag = 0;  // position within owner
};

struct Signature {
  std::map<std::string, const TypeDef*> types;
  std::map<std::string, CtorInfo> ctors;
  std::map<std::string, const FuncDef*> functions;

  const CtorInfo* find_ctor(const std::string& n) const {
    auto it = ctors.find(n);
    return it == ctors.end() ? nullptr : &it->second;
  }
};

Signature build_signature(const Model& m);

// True when `v` inhabits `type` under the signature (Absent never does;
// channel-level absence is handled separately).
bool value_has_type(const Value& v, const TypeRef& type, const Signature& sig);

}  // namespace mbt
