#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "freqdesign/error.hpp"

namespace freqdesign {

using BusId = int;

enum class BusKind { Generator, Der, Passive };

inline const char* to_string(BusKind kind) {
  switch (kind) {
    case BusKind::Generator: return "generator";
    case BusKind::Der: return "der";
    case BusKind::Passive: return "passive";
  }
  return "?";
}

struct Bus {
  BusId id = 0;
  BusKind kind = BusKind::Passive;
  double voltage_mag = 1.0;  // pu, held fixed
  double injection = 0.0;    // pu real power; loads are negative

  bool operator==(const Bus&) const = default;
};

struct Line {
  BusId from = 0;
  BusId to = 0;
  double reactance = 0.0;  // pu

  bool operator==(const Line&) const = default;
};

struct GeneratorParams {
  BusId bus = 0;
  double inertia = 0.0;        // M_G [pu s]
  double damping = 0.0;        // D_G [pu]
  double droop_inverse = 0.0;  // R_G, inverse regulation constant [pu]
  double turbine_tc = 0.0;     // tau [s]
  double reference = 0.0;      // P^r [pu]

  bool operator==(const GeneratorParams&) const = default;
};

struct DerParams {
  BusId bus = 0;
  double synthetic_inertia = 0.0;  // M_D [pu s]
  double droop = 0.0;              // D_D [pu]
  double rating = 0.0;             // P_rated [pu]
  /// Net real-power injection; mirrors the injection of the DER's bus.
  double injection = 0.0;

  bool operator==(const DerParams&) const = default;
};

/// Full description of a mixed generator/DER network as read from a system file.
struct SystemDescription {
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<GeneratorParams> generators;
  std::vector<DerParams> ders;
  double base_mva = 1.0;
  double base_kv = 1.0;
  double sync_freq = 2.0 * std::numbers::pi * 60.0;  // rad/s
  std::optional<BusId> reference_bus;

  bool operator==(const SystemDescription&) const = default;

  std::optional<std::size_t> bus_index(BusId id) const {
    for (std::size_t i = 0; i < buses.size(); ++i)
      if (buses[i].id == id) return i;
    return std::nullopt;
  }

  std::size_t require_bus(BusId id) const {
    auto idx = bus_index(id);
    if (!idx) throw Error(ErrorKind::InvalidArgument, "unknown bus " + std::to_string(id));
    return *idx;
  }

  /// Reference bus for angle solutions: the declared one, else the lowest-id generator bus.
  BusId effective_reference_bus() const {
    if (reference_bus) return *reference_bus;
    std::optional<BusId> best;
    for (const auto& g : generators)
      if (!best || g.bus < *best) best = g.bus;
    if (best) return *best;
    if (buses.empty()) throw Error(ErrorKind::Validation, "system has no buses");
    return std::min_element(buses.begin(), buses.end(), [](const Bus& a, const Bus& b) { return a.id < b.id; })->id;
  }

  std::vector<double> taus() const {
    std::vector<double> out;
    out.reserve(generators.size());
    for (const auto& g : generators) out.push_back(g.turbine_tc);
    return out;
  }

  std::vector<double> droops() const {
    std::vector<double> out;
    out.reserve(generators.size());
    for (const auto& g : generators) out.push_back(g.droop_inverse);
    return out;
  }

  std::vector<double> der_ratings() const {
    std::vector<double> out;
    out.reserve(ders.size());
    for (const auto& d : ders) out.push_back(d.rating);
    return out;
  }
};

inline double mw_to_pu(double mw, double base_mva) { return mw / base_mva; }

/// Every violated invariant, one message each. Empty when the system is valid.
inline std::vector<std::string> validation_errors(const SystemDescription& sys) {
  std::vector<std::string> errs;
  auto bus_str = [](BusId id) { return "bus " + std::to_string(id); };

  if (!(sys.base_mva > 0.0)) errs.push_back("base_mva must be > 0");
  if (!(sys.base_kv > 0.0)) errs.push_back("base_kv must be > 0");
  if (!(sys.sync_freq > 0.0)) errs.push_back("sync_freq must be > 0");
  if (sys.buses.empty()) errs.push_back("system has no buses");

  std::map<BusId, const Bus*> by_id;
  for (const auto& b : sys.buses) {
    if (!by_id.emplace(b.id, &b).second) errs.push_back("duplicate " + bus_str(b.id));
    if (!(b.voltage_mag > 0.0)) errs.push_back(bus_str(b.id) + ": voltage_mag must be > 0");
    if (!std::isfinite(b.injection)) errs.push_back(bus_str(b.id) + ": injection must be finite");
  }

  std::set<std::pair<BusId, BusId>> pairs;
  for (const auto& l : sys.lines) {
    const std::string name = "line " + std::to_string(l.from) + "-" + std::to_string(l.to);
    if (l.from == l.to) errs.push_back(name + ": from and to must differ");
    if (!by_id.count(l.from)) errs.push_back(name + ": unknown " + bus_str(l.from));
    if (!by_id.count(l.to)) errs.push_back(name + ": unknown " + bus_str(l.to));
    if (!(l.reactance > 0.0)) errs.push_back(name + ": reactance must be > 0");
    auto key = std::minmax(l.from, l.to);
    if (!pairs.insert({key.first, key.second}).second) errs.push_back(name + ": duplicate line for this bus pair");
  }

  // Connectivity by union-find over known buses.
  if (!sys.buses.empty()) {
    std::map<BusId, BusId> parent;
    for (const auto& b : sys.buses) parent[b.id] = b.id;
    auto find = [&](BusId x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const auto& l : sys.lines)
      if (by_id.count(l.from) && by_id.count(l.to)) parent[find(l.from)] = find(l.to);
    std::set<BusId> roots;
    for (const auto& b : sys.buses) roots.insert(find(b.id));
    if (roots.size() > 1) errs.push_back("network graph is not connected");
  }

  std::set<BusId> gen_buses;
  for (const auto& g : sys.generators) {
    const std::string name = "generator at " + bus_str(g.bus);
    auto it = by_id.find(g.bus);
    if (it == by_id.end()) {
      errs.push_back(name + ": unknown bus");
    } else if (it->second->kind != BusKind::Generator) {
      errs.push_back(name + ": bus kind is " + to_string(it->second->kind) + ", expected generator");
    }
    if (!gen_buses.insert(g.bus).second) errs.push_back(name + ": more than one generator on this bus");
    if (!(g.inertia > 0.0)) errs.push_back(name + ": inertia must be > 0");
    if (!(g.turbine_tc > 0.0)) errs.push_back(name + ": turbine_tc must be > 0");
    if (!(g.droop_inverse >= 0.0)) errs.push_back(name + ": droop_inverse must be >= 0");
    if (!(g.damping >= 0.0)) errs.push_back(name + ": damping must be >= 0");
    if (!std::isfinite(g.reference)) errs.push_back(name + ": reference must be finite");
  }

  std::set<BusId> der_buses;
  for (const auto& d : sys.ders) {
    const std::string name = "der at " + bus_str(d.bus);
    auto it = by_id.find(d.bus);
    if (it == by_id.end()) {
      errs.push_back(name + ": unknown bus");
    } else {
      if (it->second->kind != BusKind::Der)
        errs.push_back(name + ": bus kind is " + to_string(it->second->kind) + ", expected der");
      if (d.injection != it->second->injection)
        errs.push_back(name + ": injection does not match the bus injection");
    }
    if (gen_buses.count(d.bus)) errs.push_back(name + ": DERs may not share a bus with a generator");
    if (!der_buses.insert(d.bus).second) errs.push_back(name + ": more than one DER on this bus");
    if (!(d.synthetic_inertia >= 0.0)) errs.push_back(name + ": synthetic_inertia must be >= 0");
    if (!(d.droop >= 0.0)) errs.push_back(name + ": droop must be >= 0");
    if (!(d.rating > 0.0)) errs.push_back(name + ": rating must be > 0");
  }

  for (const auto& b : sys.buses) {
    if (b.kind == BusKind::Generator && !gen_buses.count(b.id))
      errs.push_back(bus_str(b.id) + ": generator bus has no generator record");
    if (b.kind == BusKind::Der && !der_buses.count(b.id))
      errs.push_back(bus_str(b.id) + ": der bus has no DER record");
  }

  if (sys.generators.empty()) errs.push_back("system has no generators");

  if (sys.reference_bus && !by_id.count(*sys.reference_bus))
    errs.push_back("reference bus " + std::to_string(*sys.reference_bus) + " does not exist");

  return errs;
}

inline void validate(const SystemDescription& sys) {
  auto errs = validation_errors(sys);
  if (errs.empty()) return;
  std::string msg;
  for (const auto& e : errs) msg += "\n  - " + e;
  throw Error(ErrorKind::Validation, std::to_string(errs.size()) + " invariant violation(s):" + msg);
}

/// Copies each DER bus's injection into its DerParams record.
inline void sync_der_injections(SystemDescription& sys) {
  for (auto& d : sys.ders)
    if (auto idx = sys.bus_index(d.bus)) d.injection = sys.buses[*idx].injection;
}

}  // namespace freqdesign
