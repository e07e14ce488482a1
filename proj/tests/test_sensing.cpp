#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "softtrack/sensing.hpp"

using namespace softtrack;

TEST_SUITE("sensing") {

TEST_CASE("strain is tension-only per side") {
    SegmentParams seg;  // d = 0.015, L = 0.124
    SkinParams a, b;
    b.side = 'B';

    CHECK(strain(seg, a, 0.0) == 0.0);
    CHECK(strain(seg, b, 0.0) == 0.0);
    CHECK(strain(seg, a, 0.5) == doctest::Approx(0.060483871).epsilon(1e-9));
    CHECK(strain(seg, a, -0.5) == 0.0);
    CHECK(strain(seg, b, -0.5) == doctest::Approx(0.060483871).epsilon(1e-9));
    CHECK(strain(seg, b, 0.5) == 0.0);
}

TEST_CASE("resistance arithmetic") {
    SkinParams skin;  // GF = 10, r0 = 1000
    CHECK(resistance(skin, 0.0) == 1000.0);
    CHECK(resistance(skin, 0.060483871) == doctest::Approx(1604.83871).epsilon(1e-8));
}

TEST_CASE("adc divider and saturation") {
    SkinParams skin;  // r_fixed = 1000, 10 bits
    CHECK(read_adc(skin, skin.r_fixed) == 511);
    CHECK(read_adc(skin, std::numeric_limits<double>::infinity()) == 1023);
    CHECK(read_adc(skin, 1e12) >= 1022);
    CHECK(read_adc(skin, 1e-9) == 0);
    CHECK(read_adc(skin, 1604.83871) == 630);

    skin.adc_bits = 12;
    CHECK(read_adc(skin, skin.r_fixed) == 2047);
}

TEST_CASE("noise-free channel is monotone in q on its side") {
    SegmentParams seg;
    SkinParams sa;
    sa.noise_sd = 0.0;
    sa.lag_tau = 0.0;
    SkinChannel chan(sa, 1);
    int prev = -1;
    for (double q = 0.0; q < 3.14; q += 0.01) {
        const int raw = chan.sample(seg, q, 1.0 / 85.0);
        CHECK(raw >= prev);
        prev = raw;
    }
}

TEST_CASE("lag settles to the static value") {
    SegmentParams seg;
    SkinParams sa;
    sa.noise_sd = 0.0;  // lag_tau = 0.02 default
    SkinChannel chan(sa, 1);
    int raw = 0;
    for (int i = 0; i < 400; ++i) raw = chan.sample(seg, 0.5, 1.0 / 85.0);
    SkinParams instant = sa;
    instant.lag_tau = 0.0;
    SkinChannel ref(instant, 1);
    CHECK(raw == ref.sample(seg, 0.5, 1.0 / 85.0));
}

TEST_CASE("seeded sampling is reproducible") {
    SegmentParams seg;
    SkinParams sa, sb;
    sb.side = 'B';
    auto run = [&](std::uint64_t seed) {
        SensorRig rig(seg, sa, sb, seed);
        std::vector<int> out;
        RobotState st;
        for (int i = 0; i < 200; ++i) {
            st.q = 0.4 * std::sin(0.1 * i);
            SensorFrame f = rig.sample(st, 10.0, 0.0, i / 85.0, 1.0 / 85.0);
            out.push_back(f.raw_a);
            out.push_back(f.raw_b);
            CHECK(f.raw_a >= 0);
            CHECK(f.raw_a <= sa.adc_max());
        }
        return out;
    };
    CHECK(run(42) == run(42));
    CHECK(run(42) != run(43));
}

TEST_CASE("frame carries duties and timestamp") {
    SegmentParams seg;
    SkinParams sa, sb;
    sb.side = 'B';
    SensorRig rig(seg, sa, sb, 9);
    SensorFrame f = rig.sample({0.2, 0.0}, 77.0, 0.0, 1.25, 1.0 / 60.0);
    CHECK(f.duty_a == 77.0);
    CHECK(f.duty_b == 0.0);
    CHECK(f.t == 1.25);
}

}  // TEST_SUITE
