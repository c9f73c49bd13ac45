// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cotr Authors

#pragma once

#include "cotr/core.hpp"
#include "cotr/timestamp.hpp"
#include "cotr/parser.hpp"
#include "cotr/reward.hpp"
#include "cotr/grpo.hpp"
#include "cotr/sga.hpp"
#include "cotr/planner.hpp"
#include "cotr/overlay.hpp"
#include "cotr/schema.hpp"
#include "cotr/dataset.hpp"
#include "cotr/evaluate.hpp"
#include "cotr/report.hpp"
#include "cotr/judge.hpp"
#include "cotr/model_adapters.hpp"
#include "cotr/config.hpp"
