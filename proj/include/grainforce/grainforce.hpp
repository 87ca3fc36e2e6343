#pragma once

#include "grainforce/config.hpp"
#include "grainforce/device_sim.hpp"
#include "grainforce/error.hpp"
#include "grainforce/experiment.hpp"
#include "grainforce/frame.hpp"
#include "grainforce/grain_model.hpp"
#include "grainforce/schedule_io.hpp"
#include "grainforce/signal_render.hpp"
#include "grainforce/stream.hpp"
#include "grainforce/sync_align.hpp"
#include "grainforce/track_io.hpp"
