#pragma once

#include "hfnet/bondgraph.hpp"
#include "hfnet/error.hpp"
#include "hfnet/esn.hpp"
#include "hfnet/hfnmcf.hpp"
#include "hfnet/model.hpp"
#include "hfnet/model_io.hpp"
#include "hfnet/normal_tree.hpp"
#include "hfnet/oracle.hpp"
#include "hfnet/pipeline.hpp"
#include "hfnet/state_space.hpp"
#include "hfnet/trajectories.hpp"
#include "hfnet/validate.hpp"
