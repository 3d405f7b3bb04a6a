#pragma once

#include "fairclus/constraints.hpp"
#include "fairclus/ds_subroutine.hpp"
#include "fairclus/error.hpp"
#include "fairclus/flow.hpp"
#include "fairclus/generate.hpp"
#include "fairclus/instance.hpp"
#include "fairclus/io.hpp"
#include "fairclus/log.hpp"
#include "fairclus/lp.hpp"
#include "fairclus/oracle.hpp"
#include "fairclus/pipeline.hpp"
#include "fairclus/rerouting.hpp"
#include "fairclus/simplex.hpp"
