// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "annot/error.hpp"
#include "annot/names.hpp"
#include "annot/kstore.hpp"
#include "annot/model.hpp"
#include "annot/blocks.hpp"
#include "annot/rules.hpp"
#include "annot/annotation.hpp"
#include "annot/reason.hpp"
#include "annot/project.hpp"
