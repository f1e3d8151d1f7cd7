#pragma once

#include <numbers>

#include "freqdesign/system.hpp"

namespace freqdesign {

/// Four-bus test network: generators at buses 1 and 2, DERs (initially unresponsive) at buses 3 and 4.
/// Line reactances are 1/Im(y) of the listed admittances; the conductances are dropped because the
/// analysis assumes a lossless network. Voltage magnitudes are taken as 1 pu.
inline SystemDescription four_bus_system() {
  SystemDescription sys;
  sys.base_mva = 23.0;
  sys.base_kv = 4.8;
  sys.sync_freq = 2.0 * std::numbers::pi * 60.0;
  sys.buses = {
      {1, BusKind::Generator, 1.0, 0.0},
      {2, BusKind::Generator, 1.0, 0.0},
      {3, BusKind::Der, 1.0, -0.0217},
      {4, BusKind::Der, 1.0, -0.0087},
  };
  sys.lines = {
      {1, 2, 1.0 / 10.0}, {1, 3, 1.0 / 5.0}, {1, 4, 1.0 / 5.0}, {2, 3, 1.0 / 5.0}, {3, 4, 1.0 / 5.0},
  };
  sys.generators = {
      {1, 0.1302, 0.0434, 0.217, 4.0, 0.0109},
      {2, 0.1302, 0.0434, 0.0868, 10.0, 0.0043},
  };
  sys.ders = {
      {3, 0.0, 0.0, 0.25, -0.0217},
      {4, 0.0, 0.0, 0.75, -0.0087},
  };
  return sys;
}

/// The 0.02 MW load step at bus 3, in pu on the 23 MVA base.
inline constexpr double kFourBusStepMw = 0.02;

}  // namespace freqdesign
