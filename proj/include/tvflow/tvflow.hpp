#pragma once

#include "tvflow/error.hpp"
#include "tvflow/core.hpp"
#include "tvflow/exact1d.hpp"
#include "tvflow/radial2.hpp"
#include "tvflow/fourth.hpp"
#include "tvflow/minmov.hpp"
#include "tvflow/spectral.hpp"
#include "tvflow/fracflow.hpp"
#include "tvflow/bound_report.hpp"
#include "tvflow/bounds.hpp"
#include "tvflow/regularity.hpp"
#include "tvflow/json.hpp"
#include "tvflow/csv.hpp"
#include "tvflow/scenario.hpp"
