// Copyright 2026 The ldlage Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LDLAGE_CLI_HPP_
#define LDLAGE_CLI_HPP_

namespace ldlage {

/// Entry point behind the `ldlage` binary, exposed so tests can drive the
/// commands in-process. Commands: train, evaluate, predict, synth, ablate.
///
/// Exit codes:
///   0  success
///   2  invalid arguments or unreadable/malformed inputs
///   3  training diverged (non-finite loss)
///   4  checkpoint and dataset disagree (grid / embedding dimension)
int run_cli(int argc, const char* const* argv);

}  // namespace ldlage

#endif  // LDLAGE_CLI_HPP_
