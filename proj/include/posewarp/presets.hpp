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

#ifndef POSEWARP_PRESETS_HPP_
#define POSEWARP_PRESETS_HPP_

#include "posewarp/backbone.hpp"
#include "posewarp/synthdata.hpp"
#include "posewarp/training.hpp"
#include "posewarp/warper.hpp"

namespace posewarp {

// Model and schedule sizes that train the full benchmark (40 training clips of
// 29 64x64 frames) in minutes on a single CPU core.

/// Six 3x3 layers of width 32 with dilations 1,1,2,4,8,1 (receptive field 35 px).
BackboneArch desk_backbone_arch();

/// Two residual blocks of width 16 over the five default dilations.
WarperConfig desk_warper_config();

/// Backbone schedule: Adam at 1e-3, one frame per step, 20 epochs.
TrainConfig desk_backbone_training();

/// Warper schedule: Adam at 1e-3, one pair per step, 10 epochs, frozen backbone.
TrainConfig desk_warper_training();

}  // namespace posewarp

#endif  // POSEWARP_PRESETS_HPP_
