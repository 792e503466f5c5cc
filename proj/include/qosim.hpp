#pragma once

#include "qosim/topology.hpp"
#include "qosim/power.hpp"
#include "qosim/workload.hpp"
#include "qosim/qos_policy.hpp"
#include "qosim/baselines.hpp"
#include "qosim/engine.hpp"
#include "qosim/scenario.hpp"
#include "qosim/config.hpp"
#include "qosim/io.hpp"
#include "qosim/report.hpp"
