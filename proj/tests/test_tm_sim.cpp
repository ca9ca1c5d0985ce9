#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>

#include "affam/errors.hpp"
#include "affam/tm.hpp"

using namespace affam;

namespace {

// Independent reference stepper: simulates on a mutable tape array instead of
// rewriting configuration strings, then reserializes. Used as the oracle for
// next_config.
TMConfig reference_step(const TuringMachineSpec& m, const TMConfig& c, std::size_t branch) {
    std::vector<std::string> tape;
    std::string q;
    std::size_t head = 0;
    for (const auto& sym : c) {
        bool is_state = false;
        for (const auto& s : m.states)
            if (s == sym) is_state = true;
        if (is_state) {
            q = sym;
            head = tape.size();
        } else {
            tape.push_back(sym);
        }
    }
    const auto& branches = m.transitions.at({q, tape[head]});
    const TMTransition& t = branches[branch];
    tape[head] = t.write;
    const long new_head = static_cast<long>(head) + t.move;
    TMConfig out;
    for (long i = 0; i < static_cast<long>(tape.size()); ++i) {
        if (i == new_head) out.push_back(t.next);
        out.push_back(tape[static_cast<std::size_t>(i)]);
    }
    return out;
}

std::vector<std::string> chars(const std::string& s) {
    std::vector<std::string> w;
    for (char c : s) w.push_back(std::string(1, c));
    return w;
}

}  // namespace

TEST_CASE("initial configuration is q0 cent w dollar") {
    TuringMachine m(sample_machines().at("zeros_then_ones"));
    CHECK(config_to_string(m.initial_config(chars("01"))) == "i¢01$");
    CHECK(config_to_string(m.initial_config({})) == "i¢$");
    CHECK_THROWS_AS(m.initial_config(chars("0a")), AlphabetError);
    CHECK_THROWS_AS(m.initial_config({"i"}), AlphabetError);  // state symbols are not input
}

TEST_CASE("finalize rejects broken machines") {
    TuringMachineSpec bad;
    bad.name = "bad";
    bad.states = {"q", "qa", "qr"};
    bad.initial = "q";
    bad.accept = "qa";
    bad.reject = "qr";
    bad.tape_alphabet = {"0", "¢", "$"};
    bad.input_alphabet = {"0"};

    SUBCASE("left boundary must move right") {
        bad.transitions[{"q", "¢"}] = {{"¢", "q", 0}};
        CHECK_THROWS_AS(TuringMachine{bad}, MachineError);
    }
    SUBCASE("right boundary may not move right") {
        bad.transitions[{"q", "$"}] = {{"$", "q", +1}};
        CHECK_THROWS_AS(TuringMachine{bad}, MachineError);
    }
    SUBCASE("interior writes stay interior") {
        bad.transitions[{"q", "0"}] = {{"$", "q", +1}};
        CHECK_THROWS_AS(TuringMachine{bad}, MachineError);
    }
    SUBCASE("unlabeled states cannot branch") {
        bad.transitions[{"q", "0"}] = {{"0", "q", +1}, {"0", "qa", +1}};
        CHECK_THROWS_AS(TuringMachine{bad}, MachineError);
    }
    SUBCASE("missing transitions fall through to reject") {
        TuringMachine m(bad);
        const auto& t = m.spec().transitions.at({"q", "0"});
        REQUIRE(t.size() == 1);
        CHECK(t[0].next == "qr");
    }
}

TEST_CASE("next_config implements the three head-move orderings") {
    // tiny dedicated machine exercising all three moves
    TuringMachineSpec spec;
    spec.name = "moves";
    spec.states = {"q0", "q1", "q2", "q3", "qa", "qr"};
    spec.initial = "q0";
    spec.accept = "qa";
    spec.reject = "qr";
    spec.tape_alphabet = {"a", "b", "c", "¢", "$"};
    spec.input_alphabet = {"a", "b"};
    spec.transitions[{"q0", "¢"}] = {{"¢", "q1", +1}};
    spec.transitions[{"q1", "a"}] = {{"b", "q2", +1}};  // t = +1: u x q' v
    spec.transitions[{"q2", "b"}] = {{"c", "q3", -1}};  // t = -1: u' q' u_last x v
    spec.transitions[{"q3", "b"}] = {{"a", "qa", 0}};   // t = 0: u q' x v
    TuringMachine m(spec);

    TMConfig c = m.initial_config(chars("ab"));
    CHECK(config_to_string(c) == "q0¢ab$");
    c = m.next_config(c)[0];
    CHECK(config_to_string(c) == "¢q1ab$");
    c = m.next_config(c)[0];
    CHECK(config_to_string(c) == "¢bq2b$");
    c = m.next_config(c)[0];
    CHECK(config_to_string(c) == "¢q3bc$");
    c = m.next_config(c)[0];
    CHECK(config_to_string(c) == "¢qaac$");
    CHECK_THROWS_AS(m.next_config(c), HaltedError);
}

TEST_CASE("next_config agrees with the tape-array reference stepper") {
    for (const auto& [name, spec] : sample_machines()) {
        if (spec.flavor != TMFlavor::Deterministic) continue;
        TuringMachine m(spec);
        for (const std::string in : {"", "0", "1", "01", "0011", "010", "0101", "000111"}) {
            std::vector<std::string> w;
            bool ok = true;
            for (char ch : in) {
                const std::string s(1, ch);
                if (std::find(spec.input_alphabet.begin(), spec.input_alphabet.end(), s) ==
                    spec.input_alphabet.end())
                    ok = false;
                w.push_back(s);
            }
            if (!ok) continue;
            TMConfig c = m.initial_config(w);
            for (int step = 0; step < 300; ++step) {
                if (m.is_halting_state(c[m.state_position(c)])) break;
                const TMConfig mine = m.next_config(c)[0];
                REQUIRE(mine == reference_step(m.spec(), c, 0));
                c = mine;
                REQUIRE(c.size() == w.size() + 3);  // single tape, bounded head
            }
        }
    }
    // palindrome machine over its own alphabet
    TuringMachine pal(sample_machines().at("palindrome"));
    for (const std::string in : {"", "a", "ab", "aba", "abba", "abab", "bab"}) {
        TMConfig c = pal.initial_config(chars(in));
        for (int step = 0; step < 300; ++step) {
            if (pal.is_halting_state(c[pal.state_position(c)])) break;
            const TMConfig mine = pal.next_config(c)[0];
            REQUIRE(mine == reference_step(pal.spec(), c, 0));
            c = mine;
        }
    }
}

TEST_CASE("honest streams are self-consistent and end at verdicts") {
    TuringMachine m(sample_machines().at("zeros_then_ones"));
    {
        const auto s = m.honest_stream(chars("01"), 200);
        REQUIRE(!s.truncated);
        for (std::size_t i = 0; i + 1 < s.configs.size(); ++i)
            REQUIRE(m.next_config(s.configs[i])[0] == s.configs[i + 1]);
        const auto& last = s.configs.back();
        CHECK(last[m.state_position(last)] == "qa");
    }
    {
        const auto s = m.honest_stream(chars("0"), 200);
        const auto& last = s.configs.back();
        CHECK(last[m.state_position(last)] == "qr");
    }
    CHECK(m.honest_stream(chars("01"), 0).configs.size() == 1);
    CHECK(m.honest_stream(chars("01"), 0).truncated);
}

TEST_CASE("sample machines decide their languages") {
    TuringMachine zo(sample_machines().at("zeros_then_ones"));
    auto zo_lang = [](const std::string& s) {
        const std::size_t zeros = s.find_first_not_of('0');
        const std::string z = zeros == std::string::npos ? s : s.substr(0, zeros);
        return s == z + std::string(z.size(), '1');
    };
    for (int len = 0; len <= 8; ++len)
        for (int bits = 0; bits < (1 << len); ++bits) {
            std::string s;
            for (int i = 0; i < len; ++i) s += (bits >> i) & 1 ? '1' : '0';
            REQUIRE(zo.dtm_accepts(chars(s), 500) == zo_lang(s));
        }

    TuringMachine pal(sample_machines().at("palindrome"));
    auto pal_lang = [](const std::string& s) {
        return std::equal(s.begin(), s.end(), s.rbegin());
    };
    std::vector<std::string> words{""};
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (words[i].size() < 6)
            for (char c : {'a', 'b'}) words.push_back(words[i] + c);
        REQUIRE(pal.dtm_accepts(chars(words[i]), 500) == pal_lang(words[i]));
    }
    CHECK(pal.dtm_accepts({}, 500));
}

TEST_CASE("alternating toy machine: tree shape and acceptance") {
    TuringMachine atm(sample_machines().at("first_two_equal"));
    auto lang = [](const std::string& s) { return s.size() >= 2 && s[0] == s[1]; };
    std::vector<std::string> words{""};
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (words[i].size() < 5)
            for (char c : {'0', '1'}) words.push_back(words[i] + c);
        REQUIRE(atm.atm_accepts(chars(words[i]), 64) == lang(words[i]));
    }
    CHECK_THROWS_AS(atm.honest_stream(chars("00"), 10), FlavorError);
    CHECK_THROWS_AS(TuringMachine(sample_machines().at("zeros_then_ones")).atm_accepts({}, 8),
                    FlavorError);

    // every path makes exactly two branching transitions, so the computation
    // tree has exactly 4 leaves at equal branching depth
    auto count = [&](auto&& self, const TMConfig& c, int branch_depth) -> std::map<int, int> {
        const std::string& q = c[atm.state_position(c)];
        if (atm.is_halting_state(q)) return {{branch_depth, 1}};
        auto succ = atm.next_config(c);
        std::map<int, int> acc;
        if (succ.size() == 1) {
            for (auto [d, n] : self(self, succ[0], branch_depth)) acc[d] += n;
        } else {
            for (const auto& s : succ)
                for (auto [d, n] : self(self, s, branch_depth + 1)) acc[d] += n;
        }
        return acc;
    };
    for (const std::string in : {"00", "01", "110", "0101"}) {
        const auto leaves = count(count, atm.initial_config(chars(in)), 0);
        REQUIRE(leaves.size() == 1);
        CHECK(leaves.begin()->first == 2);
        CHECK(leaves.begin()->second == 4);
    }
}

TEST_CASE("reduction machine emits well-formed instance words") {
    TuringMachine red(sample_machines().at("parity_kg_reduction"));
    {
        const auto s = red.honest_stream(chars("11"), 400);  // even parity
        REQUIRE(!s.truncated);
        const auto out = red.extract_output(s.configs);
        std::string joined;
        for (const auto& sym : out) joined += sym;
        CHECK(joined == "10A1,0E1,10");
    }
    {
        const auto s = red.honest_stream(chars("1"), 400);  // odd parity
        const auto out = red.extract_output(s.configs);
        std::string joined;
        for (const auto& sym : out) joined += sym;
        CHECK(joined == "1A1,0E1,10");
    }
}

TEST_CASE("configuration values are exact and order-sensitive") {
    const auto spec = sample_machines().at("zeros_then_ones");
    TuringMachine m(spec);
    const TMConfig a = m.initial_config(chars("01"));
    const TMConfig b = m.next_config(a)[0];
    CHECK(config_value(spec, a) != config_value(spec, b));
    // base and digits: leftmost symbol is most significant
    const auto alphabet = config_alphabet(spec);
    const long base = static_cast<long>(alphabet.size());
    mpz_class expect = 0;
    for (const auto& sym : a) {
        const long d =
            std::find(alphabet.begin(), alphabet.end(), sym) - alphabet.begin();
        expect = expect * base + d;
    }
    CHECK(config_value(spec, a) == expect);
}
