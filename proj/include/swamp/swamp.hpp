#ifndef SWAMP_SWAMP_HPP
#define SWAMP_SWAMP_HPP

#include "swamp/clusterer.hpp"
#include "swamp/crawler.hpp"
#include "swamp/error.hpp"
#include "swamp/orchestrator.hpp"
#include "swamp/parallel.hpp"
#include "swamp/porter.hpp"
#include "swamp/random.hpp"
#include "swamp/scorer.hpp"
#include "swamp/synth.hpp"
#include "swamp/tabularprep.hpp"
#include "swamp/textprep.hpp"

#endif  // SWAMP_SWAMP_HPP
