#pragma once

#include <map>
#include <string>
#include <vector>

#include "mbt/model.hpp"

namespace mbt {

// ---------------------------------------------------------------------------
// Flattened network. Hierarchy is elaborated away: only atomic component
// instances remain, connected by wires. A wire endpoint of instance -1 is the
// root boundary (external input or output).

struct Wire {
  int src_inst = -1;  // -1 = external input feeds this wire
  std::string src_port;
  int dst_inst = -1;  // -1 = wire feeds an external output
  std::string dst_port;
  bool delayed = false;
  std::string name;  // path-qualified channel name (first hop)
};

struct Net {
  struct Inst {
    std::string path;  // dotted instance path, e.g. "nm.registryMgr"
    const Component* comp = nullptr;  // always atomic
  };
  std::vector<Inst> instances;
  std::vector<Wire> wires;
  std::vector<PortDecl> inputs;    // root in-ports (the open interface)
  std::vector<PortDecl> outputs;   // root out-ports
  std::vector<int> topo_order;     // instance evaluation order

  int find_instance(const std::string& path) const;
  int find_input(const std::string& name) const;
  int find_output(const std::string& name) const;
};

// Validation result. `net` and `sig` are meaningful only when ok().
struct Validated {
  Signature sig;
  Net net;
  std::vector<Diagnostic> diagnostics;

  bool ok() const {
    for (const auto& d : diagnostics)
      if (d.severity == Severity::Error) return false;
    return true;
  }
};

// Assigns canonical uids to every expression node of the model: components in
// declaration order (transitions: guard, outputs, assignments), then function
// bodies, pre-order within each tree. Deterministic, so uids are stable across
// print/parse round trips. Expression trees must not alias nodes.
void assign_uids(Model& m);

// Full static check: name resolution, arities, types, pattern linearity,
// channel compatibility, causality (instantaneous-channel cycles are errors).
// Assigns uids first. Returns all findings; callers treat any Error-severity
// diagnostic as failure.
Validated validate(Model& m);

// Convenience: throws MbtError listing the diagnostics unless validation is
// clean of errors.
Validated validate_or_throw(Model& m);

}  // namespace mbt
