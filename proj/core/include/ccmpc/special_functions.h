// Copyright 2026 The ccmpc Authors
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

#ifndef CCMPC_SPECIAL_FUNCTIONS_H_
#define CCMPC_SPECIAL_FUNCTIONS_H_

namespace ccmpc {

// Inverse error function on (-1, 1). Returns +/-infinity at +/-1 and NaN
// outside [-1, 1]. Newton-polished, accurate to ~1e-15 relative for inputs
// that are exactly representable.
double ErfInv(double x);

}  // namespace ccmpc

#endif  // CCMPC_SPECIAL_FUNCTIONS_H_
