#pragma once

#include "tlsdyn/distributions.hpp"
#include "tlsdyn/fitting.hpp"
#include "tlsdyn/report.hpp"
#include "tlsdyn/trajectory_analysis.hpp"
