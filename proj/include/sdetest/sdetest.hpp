#pragma once

#include "sdetest/errors.hpp"
#include "sdetest/specfun.hpp"
#include "sdetest/drift.hpp"
#include "sdetest/simulate.hpp"
#include "sdetest/path_csv.hpp"
#include "sdetest/statistics.hpp"
#include "sdetest/outcome.hpp"
#include "sdetest/tests_1d.hpp"
#include "sdetest/tests_2d.hpp"
#include "sdetest/models.hpp"
#include "sdetest/procedure.hpp"
#include "sdetest/harness.hpp"
#include "sdetest/scenario.hpp"
