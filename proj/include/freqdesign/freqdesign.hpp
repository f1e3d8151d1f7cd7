#pragma once

#include "freqdesign/four_bus.hpp"
#include "freqdesign/bound.hpp"
#include "freqdesign/csv.hpp"
#include "freqdesign/design.hpp"
#include "freqdesign/error.hpp"
#include "freqdesign/fullorder.hpp"
#include "freqdesign/linalg.hpp"
#include "freqdesign/network.hpp"
#include "freqdesign/nonlinear.hpp"
#include "freqdesign/reduced.hpp"
#include "freqdesign/scenario.hpp"
#include "freqdesign/sim.hpp"
#include "freqdesign/system.hpp"
#include "freqdesign/system_io.hpp"
