#pragma once

#include "fanet/errors.hpp"
#include "fanet/evaluation.hpp"
#include "fanet/feature.hpp"
#include "fanet/fusion.hpp"
#include "fanet/geometry.hpp"
#include "fanet/hungarian.hpp"
#include "fanet/linking.hpp"
#include "fanet/pipeline.hpp"
#include "fanet/records.hpp"
#include "fanet/rng.hpp"
#include "fanet/synth.hpp"
#include "fanet/tubelet.hpp"
