#pragma once

#include "deepboot/rng.hpp"
#include "deepboot/matrix.hpp"
#include "deepboot/model.hpp"
#include "deepboot/distributions.hpp"
#include "deepboot/optimizers.hpp"
#include "deepboot/metrics.hpp"
#include "deepboot/worlds.hpp"
#include "deepboot/toy.hpp"
#include "deepboot/config.hpp"
#include "deepboot/records.hpp"
#include "deepboot/experiment.hpp"
#include "deepboot/report.hpp"
