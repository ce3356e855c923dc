#pragma once

#include "lambfence/chart.hpp"
#include "lambfence/enforcer.hpp"
#include "lambfence/error.hpp"
#include "lambfence/export.hpp"
#include "lambfence/language_model.hpp"
#include "lambfence/oracle.hpp"
#include "lambfence/pipeline.hpp"
#include "lambfence/regex.hpp"
#include "lambfence/scanner.hpp"
#include "lambfence/spec_format.hpp"
