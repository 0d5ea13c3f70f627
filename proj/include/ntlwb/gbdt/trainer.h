/*
 * Copyright 2026 The NTL Workbench Authors.
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

#ifndef NTLWB_GBDT_TRAINER_H_
#define NTLWB_GBDT_TRAINER_H_

#include "ntlwb/data/feature_table.h"
#include "ntlwb/gbdt/ensemble.h"

namespace ntlwb::gbdt {

// Least-squares gradient boosting. Every row and column of `train` is used;
// callers select the training partition and active features beforehand.
//
// Each tree is grown level by level to cfg.max_depth with an exact greedy
// search over midpoints of consecutive distinct values. Rows with a MISSING
// cell are tried on both sides and sent to whichever yields the larger
// variance reduction; one extra candidate per feature separates present from
// MISSING rows (threshold +inf, MISSING right). Ties are broken by lower
// feature index, then lower threshold. Leaves hold the mean residual.
BoostedEnsemble Fit(const data::FeatureTable& train, const TrainConfig& cfg);

}  // namespace ntlwb::gbdt

#endif  // NTLWB_GBDT_TRAINER_H_
