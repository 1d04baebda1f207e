#pragma once
// Umbrella header for the mpscope library.

#include "mpscope/cli.hpp"
#include "mpscope/errors.hpp"
#include "mpscope/graphs.hpp"
#include "mpscope/ingest.hpp"
#include "mpscope/inverse.hpp"
#include "mpscope/model.hpp"
#include "mpscope/qc.hpp"
#include "mpscope/report.hpp"
#include "mpscope/seqops.hpp"
#include "mpscope/stats.hpp"
#include "mpscope/synth.hpp"
