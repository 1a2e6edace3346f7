/* Copyright 2026 The PoseWarp Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef POSEWARP_RUNTIME_HPP_
#define POSEWARP_RUNTIME_HPP_

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace posewarp {

/// Keeps large scratch buffers (im2col matrices, activations) on the heap
/// instead of mmap/munmap per allocation, which otherwise dominates
/// training time with the system allocator.
inline void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
#endif
}

}  // namespace posewarp

#endif  // POSEWARP_RUNTIME_HPP_
