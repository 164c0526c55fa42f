#pragma once

#include "irsbf/types.hpp"
#include "irsbf/random.hpp"
#include "irsbf/core_model.hpp"
#include "irsbf/active_beamforming.hpp"
#include "irsbf/passive_beamforming.hpp"
#include "irsbf/bcd_optimizer.hpp"
#include "irsbf/channel_sim.hpp"
