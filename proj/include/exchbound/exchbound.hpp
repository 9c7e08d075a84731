/*
   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include "exchbound/bounds.hpp"
#include "exchbound/error.hpp"
#include "exchbound/events.hpp"
#include "exchbound/model.hpp"
#include "exchbound/montecarlo.hpp"
#include "exchbound/oracle.hpp"
#include "exchbound/sampler.hpp"
#include "exchbound/suite.hpp"
