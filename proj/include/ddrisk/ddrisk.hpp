#pragma once

#include "ddrisk/errors.hpp"
#include "ddrisk/linalg.hpp"
#include "ddrisk/trade_core.hpp"
#include "ddrisk/path_engine.hpp"
#include "ddrisk/risk_measures.hpp"
#include "ddrisk/market_bridge.hpp"
#include "ddrisk/io.hpp"
#include "ddrisk/surface.hpp"
