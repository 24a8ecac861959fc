#pragma once

#include "canon_gnn/canonize.hpp"
#include "canon_gnn/dataset_io.hpp"
#include "canon_gnn/distance.hpp"
#include "canon_gnn/error.hpp"
#include "canon_gnn/graph.hpp"
#include "canon_gnn/mpnn.hpp"
#include "canon_gnn/parallel.hpp"
#include "canon_gnn/probe.hpp"
#include "canon_gnn/rng.hpp"
#include "canon_gnn/stability.hpp"
#include "canon_gnn/train.hpp"
#include "canon_gnn/ugc.hpp"
#include "canon_gnn/version.hpp"
#include "canon_gnn/wltest.hpp"
