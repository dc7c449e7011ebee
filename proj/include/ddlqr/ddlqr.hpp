/*
 Copyright 2026 The ddlqr Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef DDLQR_DDLQR_HPP
#define DDLQR_DDLQR_HPP

#include "ddlqr/bench.hpp"
#include "ddlqr/common.hpp"
#include "ddlqr/deadbeat.hpp"
#include "ddlqr/excitation.hpp"
#include "ddlqr/io.hpp"
#include "ddlqr/linops.hpp"
#include "ddlqr/oracle.hpp"
#include "ddlqr/qlearn.hpp"
#include "ddlqr/qtheta.hpp"
#include "ddlqr/report.hpp"
#include "ddlqr/robustness.hpp"
#include "ddlqr/systems.hpp"

#endif  // DDLQR_DDLQR_HPP
