#pragma once

#include "mjls/model.hpp"

namespace mjls::examples {

// Delay-free example with A_1 = [[-1,0],[1,0.1]], A_2 = [[0.1,1],[0,-2]].
inline MjlsModel ex1() {
  std::vector<Mode> modes{
      {Matrix{{-1, 0}, {1, 0.1}}, {}, Matrix{{1, 0.5}, {0, 0.5}}, Matrix{{1, 1}}, {}, {}},
      {Matrix{{0.1, 1}, {0, -2}}, {}, Matrix{{0, 0.5}, {1, 0.5}}, Matrix{{1, 1}}, {}, {}},
  };
  return make_model(std::move(modes), Matrix{{-2, 2}, {2, -2}}, 0.0);
}

inline std::vector<Matrix> ex1_gains() { return {Matrix{{0}, {1}}, Matrix{{1}, {0}}}; }

inline MjlsModel ex2(double h = 0.5) {
  const Matrix C{{1, 0, 0}, {0, 1, 0}};
  std::vector<Mode> modes{
      {Matrix{{-7.364, 1.065, 1.255}, {1.809, -9.3, 0}, {0.555, 0, -7.086}},
       Matrix{{1.5, 3, 1.5}, {2.7, 3, 6.45}, {0, 1.5, 3}}, Matrix{{1, 0}, {0, 1}, {0, 1}}, C, {}, {}},
      {Matrix{{-7.469, 1.126, 1.3}, {1.851, -9.222, 0}, {0.618, 0, -7.171}},
       Matrix{{1.8, 3.44, 2.25}, {3, 3.45, 6.75}, {0, 0, 3.6}}, Matrix{{1, 0}, {1, 1}, {1, 0}}, C, {}, {}},
  };
  return make_model(std::move(modes), Matrix{{-1.5, 1.5}, {0.3, -0.3}}, h);
}

}  // namespace mjls::examples
