#pragma once

#include "csiae/channelgen.hpp"
#include "csiae/checkpoint.hpp"
#include "csiae/container.hpp"
#include "csiae/errors.hpp"
#include "csiae/evalbench.hpp"
#include "csiae/fft.hpp"
#include "csiae/models.hpp"
#include "csiae/neural.hpp"
#include "csiae/pipeline.hpp"
#include "csiae/tensor.hpp"
#include "csiae/training.hpp"
