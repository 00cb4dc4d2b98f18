#pragma once

#include "n2hp/data_io.hpp"
#include "n2hp/errors.hpp"
#include "n2hp/graph.hpp"
#include "n2hp/harness.hpp"
#include "n2hp/metrics.hpp"
#include "n2hp/model.hpp"
#include "n2hp/rng.hpp"
#include "n2hp/scorers.hpp"
#include "n2hp/splitter.hpp"
