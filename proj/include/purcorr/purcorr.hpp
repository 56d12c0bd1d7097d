#pragma once

#include "purcorr/errors.hpp"
#include "purcorr/linalg.hpp"
#include "purcorr/rng.hpp"
#include "purcorr/states.hpp"
#include "purcorr/correlation.hpp"
#include "purcorr/purification.hpp"
#include "purcorr/report.hpp"
#include "purcorr/state_file.hpp"
