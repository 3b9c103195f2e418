#pragma once

// Convenience umbrella for the whole library.

#include "rwre/ballisticity.hpp"
#include "rwre/config.hpp"
#include "rwre/diagnostics.hpp"
#include "rwre/env.hpp"
#include "rwre/errors.hpp"
#include "rwre/exact.hpp"
#include "rwre/io.hpp"
#include "rwre/lattice.hpp"
#include "rwre/ldp.hpp"
#include "rwre/oned.hpp"
#include "rwre/renewal.hpp"
#include "rwre/rng.hpp"
#include "rwre/stats.hpp"
#include "rwre/walk.hpp"
