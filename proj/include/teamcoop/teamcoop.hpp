#pragma once

#include "teamcoop/coop_bayes.hpp"
#include "teamcoop/error.hpp"
#include "teamcoop/org_model.hpp"
#include "teamcoop/payoff_opt.hpp"
#include "teamcoop/random.hpp"
#include "teamcoop/serialization.hpp"
#include "teamcoop/sim_engine.hpp"
