#pragma once

#include "nlpencil/error.hpp"
#include "nlpencil/linalg.hpp"
#include "nlpencil/chebyshev.hpp"
#include "nlpencil/problem.hpp"
#include "nlpencil/symbol.hpp"
#include "nlpencil/builtins.hpp"
#include "nlpencil/assemble.hpp"
#include "nlpencil/nep.hpp"
#include "nlpencil/multiplicity.hpp"
#include "nlpencil/spectral_report.hpp"
#include "nlpencil/sector_solver.hpp"
#include "nlpencil/io.hpp"
