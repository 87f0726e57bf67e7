// Copyright 2026 The grsvnet Authors.
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

#ifndef GRSV_SUBSPACE_HPP_
#define GRSV_SUBSPACE_HPP_

#include <vector>

#include "grsv/linalg.hpp"

namespace grsv {

/// One basis per class; bases[c-1] belongs to class c.
struct SubspaceSet {
  std::vector<SubspaceBasis> bases;
  Index feature_dim = 0;
  std::vector<Index> built_from;  // samples per class used to build each basis

  int class_count() const { return static_cast<int>(bases.size()); }
  const SubspaceBasis& basis(int class_id) const { return bases.at(static_cast<size_t>(class_id - 1)); }
};

}  // namespace grsv

#endif  // GRSV_SUBSPACE_HPP_
