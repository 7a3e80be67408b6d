// Copyright 2026 SparseMatch Project
// Licensed under the Apache License, Version 2.0

#pragma once

#include "sparsematch/codec.hpp"
#include "sparsematch/engine.hpp"
#include "sparsematch/frontends.hpp"
#include "sparsematch/ingest.hpp"
#include "sparsematch/kernel.hpp"
#include "sparsematch/metrics.hpp"
#include "sparsematch/model.hpp"
#include "sparsematch/synth.hpp"
