#pragma once

// Umbrella header: panel ingestion, penalized basis smoothing, the pivoted
// functional QR decomposition, subset selection, and artifact IO.

#include "fqr/basis.hpp"
#include "fqr/decompose.hpp"
#include "fqr/errors.hpp"
#include "fqr/io.hpp"
#include "fqr/panel.hpp"
#include "fqr/selection.hpp"
#include "fqr/smoothing.hpp"
#include "fqr/svg.hpp"
