#pragma once

#include "rachsim/config.hpp"
#include "rachsim/engine.hpp"
#include "rachsim/kpi.hpp"
#include "rachsim/numerology.hpp"
#include "rachsim/random.hpp"
#include "rachsim/report_io.hpp"
#include "rachsim/scenario.hpp"
#include "rachsim/sweep.hpp"
#include "rachsim/time.hpp"
#include "rachsim/topology.hpp"
#include "rachsim/traffic.hpp"
#include "rachsim/validation.hpp"
