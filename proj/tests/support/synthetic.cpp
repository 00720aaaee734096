#include "synthetic.hpp"

#include <cmath>
#include <map>
#include <set>
#include <string>

#include "tough/rng.hpp"
#include "tough/text.hpp"

namespace tough::testing {
namespace {

struct EntityClass {
  std::string cue, shared_cue, synonym;
  std::vector<std::string> members;
};

const std::vector<EntityClass>& classes() {
  static const std::vector<EntityClass> c = {
      {"animal", "fauna", "creature", {"fox", "wolf", "bear", "otter", "lynx"}},
      {"plant", "botanical", "flora", {"oak", "fern", "moss", "ivy", "reed"}},
      {"city", "urban", "town", {"paris", "rome", "oslo", "lima", "cairo"}},
      {"river", "flowing", "stream", {"nile", "rhine", "volga", "indus", "tiber"}},
      {"colour", "shade", "hue", {"red", "blue", "green", "amber", "violet"}},
      {"metal", "mineral", "alloy", {"iron", "copper", "zinc", "tin", "nickel"}},
  };
  return c;
}

// {0} = cue, {1} = shared cue
const std::vector<std::vector<std::string>>& templates() {
  static const std::vector<std::vector<std::string>> t = {
      {"Which", "{0}", "{1}", "does", "the", "text", "mention", "?"},
      {"Name", "the", "{1}", "{0}", "in", "the", "passage", "."},
      {"What", "{0}", "{1}", "appears", "here", "?"},
      {"Which", "{1}", "{0}", "is", "listed", "?"},
  };
  return t;
}

const std::vector<std::string>& fillers() {
  static const std::vector<std::string> f = {"near",  "saw",    "beyond", "report",
                                             "later", "notes",  "with",   "beside",
                                             "found", "record", "seen",   "after"};
  return f;
}

// std distributions differ between standard libraries; these do not.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<double> gaussian(std::mt19937_64& rng, std::size_t d, double scale) {
  const double sd = scale / std::sqrt(static_cast<double>(d));
  std::vector<double> v(d);
  for (auto& x : v) {
    double u1 = 1.0 - uniform01(rng);
    double u2 = uniform01(rng);
    x = sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  return v;
}

struct Question {
  std::string text;
  std::size_t cue_index;
};

Question make_question(std::mt19937_64& rng, const EntityClass& cls, bool use_synonym) {
  const auto& t = templates()[uniform_below(rng, templates().size())];
  std::string text;
  std::size_t cue_index = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::string w = t[i];
    if (w == "{0}") {
      w = use_synonym ? cls.synonym : cls.cue;
      cue_index = i;
    } else if (w == "{1}") {
      w = cls.shared_cue;
    }
    if (!text.empty() && !(w == "?" || w == ".")) text += ' ';
    text += w;
  }
  return {text, cue_index};
}

QAExample make_example(std::mt19937_64& rng, const std::string& id, bool use_synonym,
                       std::size_t* cue_index) {
  const auto& cs = classes();
  const std::size_t target = uniform_below(rng, cs.size());
  std::vector<std::size_t> order(cs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_below(rng, i)]);

  std::string context, answer;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& cls = cs[order[k]];
    const auto& entity = cls.members[uniform_below(rng, cls.members.size())];
    if (k) context += " , ";
    context += fillers()[uniform_below(rng, fillers().size())] + " " + entity;
    if (order[k] == target) answer = entity;
  }
  context += " .";
  auto q = make_question(rng, cs[target], use_synonym);
  if (cue_index) *cue_index = q.cue_index;
  return QAExample{id, context, q.text, {Gold{answer, -1}}};
}

}  // namespace

SynonymCorpus make_synonym_corpus(const SynonymCorpusOptions& o) {
  std::mt19937_64 rng(o.seed);

  std::vector<std::pair<std::string, std::vector<double>>> rows;
  std::set<std::string> seen;
  auto add = [&](const std::string& w, std::vector<double> v) {
    if (seen.insert(w).second) rows.emplace_back(w, std::move(v));
  };
  for (const auto& t : templates())
    for (const auto& w : t)
      if (w[0] != '{') add(to_lower(w), gaussian(rng, o.dimension, 1.0));
  for (const auto& f : fillers()) add(f, gaussian(rng, o.dimension, 1.0));
  add(",", gaussian(rng, o.dimension, 1.0));
  for (const auto& cls : classes()) {
    add(cls.cue, gaussian(rng, o.dimension, 1.0));
    add(cls.shared_cue, gaussian(rng, o.dimension, o.second_cue_scale));
    add(cls.synonym, gaussian(rng, o.dimension, 1.0));
    auto centroid = gaussian(rng, o.dimension, 1.0);
    for (const auto& m : cls.members) {
      auto v = gaussian(rng, o.dimension, 0.5);
      for (std::size_t d = 0; d < v.size(); ++d) v[d] += centroid[d];
      add(m, std::move(v));
    }
  }

  SynonymCorpus c{EmbeddingTable::from_rows(rows), {}, {}, {}, {}};
  for (const auto& cls : classes()) c.lexicon.add(cls.cue, {cls.synonym});

  for (std::size_t i = 0; i < o.n_train; ++i)
    c.train.push_back(make_example(rng, "train-" + std::to_string(i), uniform01(rng) < o.synonym_rate, nullptr));
  for (std::size_t i = 0; i < o.n_test; ++i) {
    std::size_t cue_index = 0;
    auto ex = make_example(rng, "test-" + std::to_string(i), false, &cue_index);
    auto g = gen_synonym(ex, cue_index, c.lexicon, c.table);
    c.test_synonym.push_back(std::get<PerturbedExample>(g));
    c.test.push_back(std::move(ex));
  }
  return c;
}

}  // namespace tough::testing
