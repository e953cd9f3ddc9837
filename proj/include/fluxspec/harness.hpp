#pragma once

#include "fluxspec/harness/config.hpp"
#include "fluxspec/harness/experiments.hpp"
#include "fluxspec/harness/report.hpp"
