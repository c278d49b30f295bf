#pragma once

#include "bcpnn/common.hpp"

namespace bcpnn {

/// Hypercolumn/minicolumn layout of one layer. Unit u lives in hypercolumn
/// u / n_minicolumns, minicolumn u % n_minicolumns.
struct LayerGeometry {
  int n_hypercolumns = 1;  // H
  int n_minicolumns = 1;   // M per hypercolumn

  int n_units() const { return n_hypercolumns * n_minicolumns; }
  int hypercolumn_of(int unit) const { return unit / n_minicolumns; }
  int minicolumn_of(int unit) const { return unit % n_minicolumns; }
  int unit(int hypercolumn, int minicolumn) const {
    return hypercolumn * n_minicolumns + minicolumn;
  }

  void validate() const {
    require_config(n_hypercolumns >= 1, "geometry: n_hypercolumns must be >= 1");
    require_config(n_minicolumns >= 1, "geometry: n_minicolumns must be >= 1");
  }

  bool operator==(const LayerGeometry&) const = default;
};

}  // namespace bcpnn
