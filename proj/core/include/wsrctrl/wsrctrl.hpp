#pragma once

#include "wsrctrl/csv.hpp"
#include "wsrctrl/ensemble.hpp"
#include "wsrctrl/error.hpp"
#include "wsrctrl/matops.hpp"
#include "wsrctrl/simulate.hpp"
#include "wsrctrl/stability.hpp"
#include "wsrctrl/weights.hpp"
#include "wsrctrl/wsr.hpp"
