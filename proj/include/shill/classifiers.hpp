#pragma once

#include "shill/classifiers/baseline_learners.hpp"
#include "shill/classifiers/dataset.hpp"
#include "shill/classifiers/decision_tree.hpp"
#include "shill/classifiers/ensembles.hpp"
#include "shill/classifiers/model.hpp"
#include "shill/classifiers/pca.hpp"
