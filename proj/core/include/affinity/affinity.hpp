#pragma once

#include "affinity/apps.hpp"
#include "affinity/embeddings.hpp"
#include "affinity/engine.hpp"
#include "affinity/error.hpp"
#include "affinity/exact.hpp"
#include "affinity/field.hpp"
#include "affinity/geometry.hpp"
#include "affinity/io.hpp"
#include "affinity/rng.hpp"
#include "affinity/sampler.hpp"
