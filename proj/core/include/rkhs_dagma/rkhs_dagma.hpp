#pragma once

#include "rkhs_dagma/acyclicity.hpp"
#include "rkhs_dagma/io.hpp"
#include "rkhs_dagma/kernel.hpp"
#include "rkhs_dagma/metrics.hpp"
#include "rkhs_dagma/objective.hpp"
#include "rkhs_dagma/optimizer.hpp"
#include "rkhs_dagma/representer.hpp"
#include "rkhs_dagma/sem_sim.hpp"
#include "rkhs_dagma/types.hpp"
