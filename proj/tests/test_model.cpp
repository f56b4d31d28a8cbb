#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vibronic/model.hpp"

using namespace vibronic;

namespace {

const char* kBaseConfig = R"(
# donor-bridge-acceptor junction, shared inverse-time units
delta = 30
g = 2.35
nu1 = 9.28
nu2 = 13.09
gamma1 = 0.26
gamma2 = 0
Gamma_sep = 0.01
Gamma_rec = 0.01
trunc1 = 14
trunc2 = 20
alpha.1.ct = 0.5
alpha.2.ct = -3.02
alpha.2.g = -2.69
beta.e = -0.11
beta.ct = 0.17
)";

}  // namespace

TEST_CASE("accepts the reference configuration") {
  const ModelParams p = load_config(kBaseConfig);
  CHECK(p.delta == 30.0);
  CHECK(p.rate_sep == 0.01);
  CHECK(p.rate_rec == 0.01);
  CHECK(p.eps_of(ElectronicState::CT) == 30.0);  // derived from delta
  CHECK(p.eps_of(ElectronicState::G) == 0.0);    // documented default
  // acceptor displacement follows the charge-transfer surface
  CHECK(p.alpha_of(0, ElectronicState::A) == 0.5);
  CHECK(p.alpha_of(1, ElectronicState::A) == -3.02);
  CHECK(p.beta_of(ElectronicState::A) == 0.0);
}

TEST_CASE("rejects negative frequency") {
  std::string cfg = kBaseConfig;
  cfg.replace(cfg.find("nu1 = 9.28"), 10, "nu1 = -1  ");
  CHECK_THROWS_WITH_AS(load_config(cfg), doctest::Contains("frequency must be positive"),
                       ConfigError);
}

TEST_CASE("rejects unknown keys, missing keys, bad values") {
  const std::string cfg = kBaseConfig;
  CHECK_THROWS_WITH_AS(load_config(cfg + "bogus_key = 1\n"), doctest::Contains("bogus_key"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(load_config("delta = 30\n"), doctest::Contains("missing required key"),
                       ConfigError);
  std::string low = cfg;
  low.replace(low.find("trunc1 = 14"), 11, "trunc1 = 1 ");
  CHECK_THROWS_WITH_AS(load_config(low), doctest::Contains("truncation"), ConfigError);
  CHECK_THROWS_AS(load_config(cfg + "Gamma.e = -0.1\n"), ConfigError);
  CHECK_THROWS_WITH_AS(load_config(cfg + "Gamma.a = abc\n"), doctest::Contains("not a number"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(load_config(cfg + "g = 1\n"), doctest::Contains("duplicate"), ConfigError);
}

TEST_CASE("delta consistency against explicit eps") {
  const std::string cfg = kBaseConfig;
  CHECK_THROWS_WITH_AS(load_config(cfg + "eps.ct = 29\n"), doctest::Contains("inconsistent"),
                       ConfigError);
  const ModelParams p = load_config(cfg + "eps.ct = 30\n");
  CHECK(p.delta == 30.0);
}

TEST_CASE("alpha on the reference surface must vanish") {
  const std::string cfg = kBaseConfig;
  CHECK_THROWS_AS(load_config(cfg + "alpha.1.e = 0.3\n"), ConfigError);
  CHECK_NOTHROW(load_config(cfg + "alpha.1.e = 0\n"));
}

TEST_CASE("section headers prefix keys") {
  const Config c = Config::parse("[alpha]\n1.ct = 0.5\n[beta]\ne = -0.11\n");
  CHECK(c.has("alpha.1.ct"));
  CHECK(c.has("beta.e"));
  CHECK(c.get_real("alpha.1.ct") == 0.5);
}

TEST_CASE("serialization round-trip is the identity") {
  const ModelParams p = load_config(kBaseConfig);
  const ModelParams q = load_config(serialize(p));
  CHECK(q.delta == p.delta);
  CHECK(q.g == p.g);
  CHECK(q.nu == p.nu);
  CHECK(q.alpha == p.alpha);
  CHECK(q.beta == p.beta);
  CHECK(q.gamma_vib == p.gamma_vib);
  CHECK(q.gamma_deph == p.gamma_deph);
  CHECK(q.rate_sep == p.rate_sep);
  CHECK(q.rate_rec == p.rate_rec);
  CHECK(q.trunc == p.trunc);
  CHECK(q.eps == p.eps);
}

TEST_CASE("basis indexing is a bijection") {
  const VibronicBasis b{{3, 5}};
  CHECK(b.dim() == 60);
  CHECK(b.index_of(ElectronicState::G, 0, 0) == 0);

  // exhaustive inverse check at small truncation
  std::vector<bool> seen(b.dim(), false);
  for (auto z : kStates) {
    for (int n1 = 0; n1 < 3; ++n1) {
      for (int n2 = 0; n2 < 5; ++n2) {
        const int i = b.index_of(z, n1, n2);
        CHECK(!seen[i]);
        seen[i] = true;
        const auto lv = b.state_of(i);
        CHECK(lv.z == z);
        CHECK(lv.n1 == n1);
        CHECK(lv.n2 == n2);
      }
    }
  }
  const VibronicBasis big{{8, 8}};
  const auto lv = big.state_of(big.index_of(ElectronicState::E, 3, 5));
  CHECK(lv.z == ElectronicState::E);
  CHECK(lv.n1 == 3);
  CHECK(lv.n2 == 5);

  CHECK_THROWS_AS(b.index_of(ElectronicState::E, 0, 5), std::out_of_range);
  CHECK_THROWS_AS(b.state_of(60), std::out_of_range);
}

TEST_CASE("override application") {
  Config c = Config::parse(kBaseConfig);
  c.apply_overrides({"g=0", "beta.e = 0"});
  CHECK(c.get_real("g") == 0.0);
  CHECK(c.get_real("beta.e") == 0.0);
  CHECK_THROWS_AS(c.apply_overrides({"novalue"}), ConfigError);
}
