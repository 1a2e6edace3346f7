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

#include "posewarp/presets.hpp"

namespace posewarp {

BackboneArch desk_backbone_arch() {
  BackboneArch a;
  a.width = 32;
  a.hidden_layers = 4;
  a.dilations = {1, 1, 2, 4, 8, 1};
  return a;
}

WarperConfig desk_warper_config() {
  WarperConfig c;
  c.res_blocks = 2;
  c.res_width = 16;
  return c;
}

TrainConfig desk_backbone_training() {
  TrainConfig c = TrainConfig::with_epochs(20);
  c.base_lr = 1e-3;
  c.batch_size = 1;
  c.augment.enabled = false;
  return c;
}

TrainConfig desk_warper_training() {
  TrainConfig c = TrainConfig::with_epochs(10);
  c.base_lr = 1e-3;
  c.batch_size = 1;
  c.augment.enabled = false;
  c.finetune_backbone = false;
  return c;
}

}  // namespace posewarp
