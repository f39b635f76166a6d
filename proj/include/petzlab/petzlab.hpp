#pragma once

// Umbrella header.

#include "petzlab/bench.hpp"
#include "petzlab/channels.hpp"
#include "petzlab/decoders.hpp"
#include "petzlab/error.hpp"
#include "petzlab/infomeasures.hpp"
#include "petzlab/matcore.hpp"
#include "petzlab/optdec.hpp"
#include "petzlab/quadrature.hpp"
#include "petzlab/quantum.hpp"
#include "petzlab/random.hpp"
#include "petzlab/sw.hpp"
