// Copyright 2026 The GenLI Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

namespace genli {

// Keeps large tensor buffers on the heap instead of fresh mmap regions.
// Training and inference allocate and free multi-megabyte blocks every
// batch; with the default glibc threshold each one becomes an mmap/munmap
// pair and page faults dominate. No-op on other C libraries.
void tune_allocator();

}  // namespace genli
