/*
 * Copyright 2026 The Workbench Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef WORKBENCH_SERIALIZE_H_
#define WORKBENCH_SERIALIZE_H_

#include "workbench/compare.h"
#include "workbench/dataset.h"
#include "workbench/diagnose.h"
#include "workbench/explain.h"
#include "workbench/interpret.h"
#include "workbench/json_util.h"
#include "workbench/metrics.h"

namespace workbench {

// Result bodies for reports and API responses. Every body carries a "test"
// name; curves are {grid, value, count} series.

Json ToJson(const MetricSet& metrics);
Json ToJson(const EdaSummary& summary);
Json ToJson(const DataQualityReport& report);
Json ToJson(const FeatureSelection& selection);

Json ToJson(const GlobalInterpretation& result);
Json ToJson(const LocalInterpretation& result);

Json ToJson(const PfiResult& result);
Json ToJson(const PdpCurve& result);
Json ToJson(const PdpSurface& result);
Json ToJson(const AleCurve& result);
Json ToJson(const LimeExplanation& result);
Json ToJson(const ShapExplanation& result);

Json ToJson(const AccuracyResult& result);
Json ToJson(const WeakspotResult& result);
Json ToJson(const OverfitResult& result);
Json ToJson(const ReliabilityResult& result);
Json ToJson(const RobustnessResult& result);
Json ToJson(const ResilienceResult& result);
Json ToJson(const FairnessResult& result);

Json ToJson(const ComparisonReport& report);

}  // namespace workbench

#endif  // WORKBENCH_SERIALIZE_H_
