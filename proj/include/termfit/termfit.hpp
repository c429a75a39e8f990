#pragma once

#include "termfit/calibration.hpp"
#include "termfit/cli.hpp"
#include "termfit/curve_basis.hpp"
#include "termfit/diagnostics.hpp"
#include "termfit/errors.hpp"
#include "termfit/evaluation.hpp"
#include "termfit/market_data.hpp"
#include "termfit/regression.hpp"
#include "termfit/report_io.hpp"
#include "termfit/synthetic.hpp"
