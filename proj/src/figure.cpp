#include <cmath>
#include <fstream>

#include "pointmatch/experiment.hpp"
#include "pointmatch/oracles.hpp"
#include "pointmatch/random.hpp"
#include "pointmatch/stable.hpp"

namespace pm {

Figure1Result figure1(std::uint64_t seed, std::size_t n, const std::filesystem::path& out_dir) {
  if (n < 2) throw std::invalid_argument("figure1: needs n >= 2");
  const Domain dom(2, std::sqrt(static_cast<double>(n)), Boundary::Torus);
  const auto one = sample_binomial(dom, n, Color::Red, derive_seed(seed, 10, 0));
  const auto two = merge(sample_binomial(dom, n / 2, Color::Red, derive_seed(seed, 11, 0)),
                         sample_binomial(dom, n / 2, Color::Blue, derive_seed(seed, 12, 0)));

  Figure1Result out;
  std::filesystem::create_directories(out_dir);
  auto emit = [&](const char* file, const ColoredPointSet& pts, const Matching& m, const std::string& title) {
    const auto path = out_dir / file;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    SvgStyle style;
    style.title = title;
    write_matching_svg(f, pts, m, style);
    out.files.push_back(path);
  };

  const Matching stable1 = stable_match(one, MatchMode::OneColor);
  out.stable_one_color_length = total_length(one, stable1);
  emit("panel_i_stable_one_color.svg", one, stable1, "(i) stable, one color");

  Matching min1;
  if (n <= kExactOneColorMax && n % 2 == 0) {
    min1 = min_length_one_color_exact(one);
    out.min_one_color_exact = true;
  } else {
    min1 = min_length_one_color_greedy(one);
    refine_two_opt(one, min1);
  }
  out.min_one_color_length = total_length(one, min1);
  emit("panel_ii_min_length_one_color.svg", one, min1,
       out.min_one_color_exact ? "(ii) minimum length, one color" : "(ii) short, one color (greedy + 2-opt)");

  const Matching stable2 = stable_match(two, MatchMode::TwoColor);
  out.stable_two_color_length = total_length(two, stable2);
  emit("panel_iii_stable_two_color.svg", two, stable2, "(iii) stable, two colors");

  const Matching min2 = min_length_bipartite(two);
  out.min_two_color_length = total_length(two, min2);
  emit("panel_iv_min_length_two_color.svg", two, min2, "(iv) minimum length, two colors");
  return out;
}

}  // namespace pm
