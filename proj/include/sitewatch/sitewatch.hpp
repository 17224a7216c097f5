// sitewatch.hpp - umbrella header.

#pragma once

#include "characterize.hpp"
#include "core.hpp"
#include "eval.hpp"
#include "features.hpp"
#include "ingestion.hpp"
#include "ml/model.hpp"
#include "random.hpp"
#include "whois.hpp"
#include "wordseg.hpp"
