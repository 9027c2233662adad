#pragma once

#include "affinor/expr.hpp"
#include "affinor/linalg.hpp"
#include "affinor/report.hpp"
#include "affinor/sampling.hpp"
#include "affinor/chart.hpp"
#include "affinor/structure.hpp"
#include "affinor/submanifold.hpp"
#include "affinor/semi_invariant.hpp"
#include "affinor/integrability.hpp"
#include "affinor/catalog.hpp"
#include "affinor/spec_file.hpp"
#include "affinor/suite.hpp"
