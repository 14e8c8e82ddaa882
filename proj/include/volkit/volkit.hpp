#pragma once

#include "volkit/error.hpp"
#include "volkit/marketdata.hpp"
#include "volkit/estimators.hpp"
#include "volkit/garch.hpp"
#include "volkit/diagnostics.hpp"
#include "volkit/varswap.hpp"
#include "volkit/simulate.hpp"
#include "volkit/stationarity.hpp"
#include "volkit/backtest.hpp"
#include "volkit/report.hpp"
