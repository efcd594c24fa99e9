#pragma once

#include "roboss/data.hpp"
#include "roboss/error.hpp"
#include "roboss/format.hpp"
#include "roboss/harness.hpp"
#include "roboss/kernel.hpp"
#include "roboss/loss.hpp"
#include "roboss/random.hpp"
#include "roboss/serialization.hpp"
#include "roboss/stats.hpp"
#include "roboss/theory.hpp"
#include "roboss/trainer.hpp"
