// Copyright 2026 The curvtopo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "curvtopo/persistence.hpp"
#include "flag_complex.hpp"

namespace curvtopo::detail {

/// Persistent cohomology of the 2-skeleton of a flag complex. Edge
/// coboundaries are reduced in reverse filtration order; edges that merge
/// components are cleared, and a column whose oldest cofacet has the column's
/// edge as its youngest face is paired at once without being stored
/// (an apparent pair). Yields the same pairs as the boundary reduction.
///
/// `triangles` is the number of triangles of the complex, used for the Betti
/// numbers in `stats` only. With `with_triangles == false` every cycle is
/// essential.
PersistenceDiagram reduce_coboundaries(const FlagComplex& complex, double max_eps,
                                       bool with_triangles, std::uint64_t triangles,
                                       ReductionStats* stats);

} // namespace curvtopo::detail
