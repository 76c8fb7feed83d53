// Copyright 2026 The PLC Authors. All Rights Reserved.
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

#include "plc/bytes.hpp"
#include "plc/codec.hpp"
#include "plc/container.hpp"
#include "plc/error.hpp"
#include "plc/image_io.hpp"
#include "plc/masking.hpp"
#include "plc/metrics.hpp"
#include "plc/pceem.hpp"
#include "plc/random.hpp"
#include "plc/rans.hpp"
#include "plc/tensor.hpp"
#include "plc/transforms.hpp"
#include "plc/weights.hpp"
