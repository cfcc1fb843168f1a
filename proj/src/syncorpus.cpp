#include "docfuse/syncorpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "docfuse/rng.hpp"

namespace docfuse {

const char* pronoun_token(Gender g) {
    switch (g) {
        case Gender::Masc: return "er";
        case Gender::Fem: return "sie";
        case Gender::Neut: return "es";
    }
    return "?";
}

const char* article_token(Gender g) {
    switch (g) {
        case Gender::Masc: return "der";
        case Gender::Fem: return "die";
        case Gender::Neut: return "das";
    }
    return "?";
}

double GrammarSpec::gender_share(Gender g) const {
    double total = 0.0, part = 0.0;
    for (const auto& n : nouns) {
        total += n.weight;
        if (n.gender == g) part += n.weight;
    }
    return total > 0.0 ? part / total : 0.0;
}

double GrammarSpec::majority_gender_rate() const {
    return std::max({gender_share(Gender::Masc), gender_share(Gender::Fem),
                     gender_share(Gender::Neut)});
}

void GrammarSpec::validate() const {
    if (nouns.empty() || verbs.empty() || phrases.empty())
        throw Error("grammar spec: empty lexicon");
    for (const auto& p : phrases)
        if (p.words.empty()) throw Error("grammar spec: empty phrase");
    if (doc_len_lo < 1 || doc_len_lo > doc_len_hi)
        throw Error("grammar spec: invalid document length range");
    if (pronoun_rate < 0.0 || pronoun_rate > 1.0)
        throw Error("grammar spec: pronoun_rate out of range");
    for (const auto& n : nouns)
        if (n.weight <= 0.0) throw Error("grammar spec: noun weight must be > 0");
}

GrammarSpec GrammarSpec::defaults() {
    GrammarSpec s;
    auto add = [&](const char* src, const char* tgt, Gender g, double w) {
        s.nouns.push_back({src, tgt, g, w});
    };
    // masculine nouns dominate so that the majority-gender bound stays away
    // from the uniform 1/3
    add("dog", "hund", Gender::Masc, 6.0);
    add("table", "tisch", Gender::Masc, 6.0);
    add("chair", "stuhl", Gender::Masc, 6.0);
    add("tree", "baum", Gender::Masc, 6.0);
    add("stone", "stein", Gender::Masc, 6.0);
    add("bird", "vogel", Gender::Masc, 6.0);
    add("mountain", "berg", Gender::Masc, 6.0);
    add("river", "fluss", Gender::Masc, 6.0);
    add("car", "wagen", Gender::Masc, 6.0);
    add("moon", "mond", Gender::Masc, 6.0);
    add("cat", "katze", Gender::Fem, 2.0);
    add("lamp", "lampe", Gender::Fem, 2.0);
    add("flower", "blume", Gender::Fem, 2.0);
    add("bag", "tasche", Gender::Fem, 2.0);
    add("box", "kiste", Gender::Fem, 2.0);
    add("sun", "sonne", Gender::Fem, 2.0);
    add("street", "strasse", Gender::Fem, 2.0);
    add("cloud", "wolke", Gender::Fem, 2.0);
    add("map", "karte", Gender::Fem, 2.0);
    add("clock", "uhr", Gender::Fem, 2.0);
    add("house", "haus", Gender::Neut, 1.0);
    add("book", "buch", Gender::Neut, 1.0);
    add("window", "fenster", Gender::Neut, 1.0);
    add("horse", "pferd", Gender::Neut, 1.0);
    add("boat", "boot", Gender::Neut, 1.0);
    add("light", "licht", Gender::Neut, 1.0);
    add("picture", "bild", Gender::Neut, 1.0);
    add("field", "feld", Gender::Neut, 1.0);
    add("bread", "brot", Gender::Neut, 1.0);
    add("glass", "glas", Gender::Neut, 1.0);

    s.professions = {{"teacher", "lehrer"},   {"painter", "maler"},
                     {"baker", "baecker"},    {"judge", "richter"},
                     {"gardener", "gaertner"}, {"driver", "fahrer"}};
    s.verbs = {{"sings", "singt"},   {"rests", "ruht"},   {"waits", "wartet"},
               {"falls", "faellt"},  {"stands", "steht"}, {"lies", "liegt"},
               {"turns", "dreht"},   {"sounds", "klingt"}, {"stays", "bleibt"},
               {"seems", "wirkt"}};
    s.adjectives = {{"old", "alte"},    {"young", "junge"}, {"small", "kleine"},
                    {"big", "grosse"},  {"red", "rote"},    {"blue", "blaue"},
                    {"quiet", "stille"}, {"bright", "helle"}};
    // fixed-order adverbial phrases over pairwise disjoint words
    auto ph = [&](std::initializer_list<std::pair<const char*, const char*>> words) {
        Phrase p;
        for (const auto& [src, tgt] : words) p.words.push_back({src, tgt});
        s.phrases.push_back(std::move(p));
    };
    ph({{"today", "heute"}, {"there", "dort"}, {"nextdoor", "nebenan"}});
    ph({{"quietly", "leise"}, {"really", "wirklich"}, {"gently", "sanft"}});
    ph({{"quickly", "schnell"}, {"again", "wieder"}, {"away", "fort"}});
    ph({{"often", "oft"}, {"outside", "draussen"}, {"around", "umher"}});
    ph({{"evenings", "abends"}, {"gladly", "gerne"}, {"longer", "laenger"}});
    ph({{"slowly", "langsam"}, {"maybe", "vielleicht"}, {"lastly", "zuletzt"}});
    ph({{"tomorrow", "morgen"}, {"surely", "bestimmt"}, {"afresh", "erneut"}});
    ph({{"seldom", "selten"}, {"alone", "allein"}, {"underway", "unterwegs"}});
    ph({{"mostly", "meist"}, {"together", "zusammen"}, {"homeward", "daheim"}});
    ph({{"now", "nun"}, {"finally", "endlich"}, {"still", "still"}});
    ph({{"always", "immer"}, {"quite", "ganz"}, {"near", "nah"}});
    ph({{"soon", "bald"}, {"very", "sehr"}, {"far", "weit"}});
    ph({{"yet", "doch"}, {"rather", "eher"}, {"glad", "froh"}});
    ph({{"never", "nie"}, {"so", "so"}, {"late", "spaet"}});
    ph({{"then", "dann"}, {"probably", "wohl"}, {"fairly", "ziemlich"}, {"short", "kurz"}});
    ph({{"here", "hier"}, {"above", "oben"}, {"truly", "echt"}, {"warm", "warm"}});
    return s;
}

GrammarSpec GrammarSpec::alt_domain() {
    GrammarSpec s = defaults(); // keep rates and ranges
    s.nouns.clear();
    s.phrases.clear();
    auto add = [&](const char* src, const char* tgt, Gender g, double w) {
        s.nouns.push_back({src, tgt, g, w});
    };
    add("engine", "motor", Gender::Masc, 4.0);
    add("harbor", "hafen", Gender::Masc, 4.0);
    add("tower", "turm", Gender::Masc, 4.0);
    add("path", "pfad", Gender::Masc, 4.0);
    add("market", "markt", Gender::Masc, 4.0);
    add("train", "zug", Gender::Masc, 4.0);
    add("hill", "huegel", Gender::Masc, 4.0);
    add("beach", "strand", Gender::Masc, 4.0);
    add("forest", "wald", Gender::Masc, 4.0);
    add("crane", "kran", Gender::Masc, 4.0);
    add("bridge", "bruecke", Gender::Fem, 1.5);
    add("factory", "fabrik", Gender::Fem, 1.5);
    add("coin", "muenze", Gender::Fem, 1.5);
    add("signal", "ampel", Gender::Fem, 1.5);
    add("alley", "gasse", Gender::Fem, 1.5);
    add("island", "insel", Gender::Fem, 1.5);
    add("dome", "kuppel", Gender::Fem, 1.5);
    add("ramp", "rampe", Gender::Fem, 1.5);
    add("rail", "schiene", Gender::Fem, 1.5);
    add("hall", "halle", Gender::Fem, 1.5);
    add("depot", "lager", Gender::Neut, 1.0);
    add("ship", "schiff", Gender::Neut, 1.0);
    add("track", "gleis", Gender::Neut, 1.0);
    add("gate", "tor", Gender::Neut, 1.0);
    add("roof", "dach", Gender::Neut, 1.0);
    add("shore", "ufer", Gender::Neut, 1.0);
    add("plant", "werk", Gender::Neut, 1.0);
    add("belt", "band", Gender::Neut, 1.0);
    add("wheel", "rad", Gender::Neut, 1.0);
    add("rope", "seil", Gender::Neut, 1.0);

    s.professions = {{"locksmith", "schlosser"}, {"weaver", "weber"},
                     {"printer", "drucker"},     {"smith", "schmied"},
                     {"molder", "former"},       {"inspector", "pruefer"}};
    s.verbs = {{"rolls", "rollt"},     {"hums", "summt"},   {"blinks", "blinkt"},
               {"starts", "startet"},  {"ends", "endet"},   {"circles", "kreist"},
               {"stalls", "stockt"},   {"anchors", "ankert"}, {"tips", "kippt"},
               {"shifts", "rueckt"}};
    s.adjectives = {{"fresh", "neue"},  {"lengthy", "lange"}, {"wide", "breite"},
                    {"gray", "graue"},  {"wet", "nasse"},     {"steep", "steile"},
                    {"round", "runde"}, {"smooth", "glatte"}};
    auto ph = [&](std::initializer_list<std::pair<const char*, const char*>> words) {
        Phrase p;
        for (const auto& [src, tgt] : words) p.words.push_back({src, tgt});
        s.phrases.push_back(std::move(p));
    };
    ph({{"early", "frueh"}, {"indoors", "drinnen"}, {"anyway", "ohnehin"}});
    ph({{"later", "spaeter"}, {"besides", "daneben"}, {"once", "einmal"}});
    ph({{"just", "knapp"}, {"beneath", "darunter"}, {"twice", "zweimal"}});
    ph({{"almost", "fast"}, {"everywhere", "ueberall"}, {"meanwhile", "derweil"}});
    ph({{"right", "gleich"}, {"after", "danach"}, {"onward", "weiter"}});
    ph({{"long", "lang"}, {"before", "zuvor"}, {"elsewhere", "anderswo"}});
    ph({{"closely", "dicht"}, {"behind", "dahinter"}, {"yonder", "drueben"}});
    ph({{"half", "halb"}, {"across", "darueber"}, {"inward", "innen"}});
    ph({{"deep", "tief"}, {"within", "darin"}, {"below", "unten"}});
    ph({{"first", "erst"}, {"mornings", "morgens"}, {"softly", "sacht"}});
    ph({{"evermore", "stets"}, {"tightly", "eng"}, {"bunched", "beisammen"}});
    ph({{"hardly", "kaum"}, {"ever", "je"}, {"distant", "fern"}});
    ph({{"calmly", "ruhig"}, {"further", "voran"}, {"upward", "empor"}});
    ph({{"typically", "zumeist"}, {"somewhat", "etwas"}, {"askew", "schief"}});
    ph({{"wholly", "voellig"}, {"without", "ohne"}, {"haste", "eile"}, {"forth", "hervor"}});
    ph({{"nearly", "beinahe"}, {"daily", "taeglich"}, {"anew", "aufs"}, {"new2", "neu"}});
    return s;
}

namespace {

enum class SentKind { Intro, Pronoun, Profession };

struct SentPair {
    std::vector<std::string> src, tgt;
    SentKind kind;
    Gender referent; // referent gender after this sentence
    std::size_t target_pos = 0; // position of the ambiguous token, if any
};

class Generator {
  public:
    Generator(const GrammarSpec& spec, Rng& rng) : spec_(spec), rng_(rng) {
        noun_weights_.reserve(spec.nouns.size());
        for (const auto& n : spec.nouns) noun_weights_.push_back(n.weight);
    }

    std::vector<SentPair> make_document() {
        std::size_t len = static_cast<std::size_t>(
            rng_.uniform_int(static_cast<std::int64_t>(spec_.doc_len_lo),
                             static_cast<std::int64_t>(spec_.doc_len_hi)));
        std::vector<SentPair> doc;
        doc.push_back(intro());
        for (std::size_t t = 1; t < len; ++t) {
            Gender ref = doc.back().referent;
            if (rng_.bernoulli(spec_.pronoun_rate)) {
                // type choice independent of the referent gender, so pronoun
                // marginals stay equal to the noun sampling shares
                bool prof = !spec_.professions.empty() && rng_.bernoulli(spec_.profession_share);
                doc.push_back(prof ? profession(ref) : pronoun(ref));
            } else {
                doc.push_back(intro());
            }
        }
        return doc;
    }

  private:
    const GrammarSpec& spec_;
    Rng& rng_;
    std::vector<double> noun_weights_;

    const GrammarSpec::WordPair& pick(const std::vector<GrammarSpec::WordPair>& v) {
        return v[static_cast<std::size_t>(
            rng_.uniform_int(0, static_cast<std::int64_t>(v.size()) - 1))];
    }

    void add_fillers(SentPair& s, std::size_t lo, std::size_t hi) {
        std::size_t n = static_cast<std::size_t>(
            rng_.uniform_int(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
        for (std::size_t i = 0; i < n; ++i) {
            const auto& w = pick(spec_.fillers);
            s.src.push_back(w.src);
            s.tgt.push_back(w.tgt);
        }
    }

    /// "<fillers> <verb> the [adj] <noun>" -- the gendered noun closes the
    /// sentence so the following sentence-initial reference can see it.
    SentPair intro() {
        SentPair s;
        s.kind = SentKind::Intro;
        const auto& noun = spec_.nouns[rng_.weighted_index(noun_weights_)];
        s.referent = noun.gender;
        add_fillers(s, spec_.intro_filler_lo, spec_.intro_filler_hi);
        const auto& verb = pick(spec_.verbs);
        s.src.push_back(verb.src);
        s.tgt.push_back(verb.tgt);
        s.src.push_back("the");
        s.tgt.push_back(article_token(noun.gender));
        if (!spec_.adjectives.empty() && rng_.bernoulli(spec_.adjective_rate)) {
            const auto& adj = pick(spec_.adjectives);
            s.src.push_back(adj.src);
            s.tgt.push_back(adj.tgt);
        }
        s.src.push_back(noun.src);
        s.tgt.push_back(noun.tgt);
        s.target_pos = s.tgt.size() - 1;
        return s;
    }

    /// "it <verb> <fillers>" / "<er|sie|es> <verb> <fillers>"
    SentPair pronoun(Gender ref) {
        SentPair s;
        s.kind = SentKind::Pronoun;
        s.referent = ref;
        s.src.push_back("it");
        s.tgt.push_back(pronoun_token(ref));
        s.target_pos = 0;
        const auto& verb = pick(spec_.verbs);
        s.src.push_back(verb.src);
        s.tgt.push_back(verb.tgt);
        add_fillers(s, spec_.ref_filler_lo, spec_.ref_filler_hi);
        return s;
    }

    /// "<profession> <verb> <fillers>" with the inflected form first: the
    /// feminine referent takes base+"in", any other referent the base form.
    SentPair profession(Gender ref) {
        SentPair s;
        s.kind = SentKind::Profession;
        s.referent = ref;
        const auto& prof = spec_.professions[static_cast<std::size_t>(
            rng_.uniform_int(0, static_cast<std::int64_t>(spec_.professions.size()) - 1))];
        std::string form = ref == Gender::Fem ? prof.tgt_base + "in" : prof.tgt_base;
        s.src.push_back(prof.src);
        s.tgt.push_back(form);
        s.target_pos = 0;
        const auto& verb = pick(spec_.verbs);
        s.src.push_back(verb.src);
        s.tgt.push_back(verb.tgt);
        add_fillers(s, spec_.ref_filler_lo, spec_.ref_filler_hi);
        return s;
    }
};

std::string doc_name(const char* prefix, std::size_t n) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%06zu", prefix, n);
    return buf;
}

} // namespace

GeneratedCorpus generate(const GrammarSpec& spec, std::size_t n_parallel_docs,
                         std::size_t n_mono_docs, std::size_t n_challenge) {
    spec.validate();
    Rng rng(spec.seed);
    Generator gen(spec, rng);
    GeneratedCorpus out;

    auto to_docs = [](const std::vector<SentPair>& doc, TextDocument& src, TextDocument& tgt) {
        for (const auto& s : doc) {
            src.sentences.push_back(s.src);
            tgt.sentences.push_back(s.tgt);
        }
    };

    for (std::size_t d = 0; d < n_parallel_docs; ++d) {
        TextDocument src, tgt;
        src.id = tgt.id = doc_name("par", d);
        to_docs(gen.make_document(), src, tgt);
        out.parallel_src.push_back(std::move(src));
        out.parallel_tgt.push_back(std::move(tgt));
    }
    for (std::size_t d = 0; d < n_mono_docs; ++d) {
        TextDocument tgt;
        tgt.id = doc_name("mono", d);
        std::vector<SentPair> doc = gen.make_document();
        for (const auto& s : doc) tgt.sentences.push_back(s.tgt);
        out.mono_tgt.push_back(std::move(tgt));
    }

    // challenge harvesting: reference positions whose previous sentence is
    // a noun introduction (the context determines the answer)
    std::size_t guard = 0;
    while ((out.pronoun_challenge.size() < n_challenge ||
            out.keyword_challenge.size() < n_challenge) &&
           guard < 200000) {
        ++guard;
        std::vector<SentPair> doc = gen.make_document();
        for (std::size_t t = 1; t < doc.size(); ++t) {
            if (doc[t - 1].kind != SentKind::Intro) continue;
            const SentPair& cur = doc[t];
            TextContrastiveExample ex;
            ex.source = cur.src;
            std::size_t lo = t > 2 ? t - 2 : 0;
            for (std::size_t j = lo; j < t; ++j) ex.context.push_back(doc[j].tgt);
            ex.reference = cur.tgt;
            if (cur.kind == SentKind::Pronoun && out.pronoun_challenge.size() < n_challenge) {
                for (Gender g : {Gender::Masc, Gender::Fem, Gender::Neut}) {
                    if (g == cur.referent) continue;
                    auto alt = cur.tgt;
                    alt[cur.target_pos] = pronoun_token(g);
                    ex.contrastive.push_back(std::move(alt));
                }
                out.pronoun_challenge.push_back(std::move(ex));
            } else if (cur.kind == SentKind::Profession &&
                       out.keyword_challenge.size() < n_challenge) {
                const std::string& form = cur.tgt[cur.target_pos];
                std::string other = cur.referent == Gender::Fem
                                        ? form.substr(0, form.size() - 2)
                                        : form + "in";
                auto alt = cur.tgt;
                alt[cur.target_pos] = other;
                ex.contrastive.push_back(std::move(alt));
                KeywordExample kw;
                kw.id = doc_name("kw", out.keyword_challenge.size());
                kw.correct_terms = {form};
                kw.incorrect_terms = {other};
                out.keywords.push_back(std::move(kw));
                out.keyword_challenge.push_back(std::move(ex));
            }
        }
    }
    if (out.pronoun_challenge.size() < n_challenge ||
        out.keyword_challenge.size() < n_challenge)
        throw Error("could not harvest enough challenge examples; grammar too sparse");

    for (const auto& n : spec.nouns) out.lexicon_oracle.push_back({n.tgt, n.src});
    for (const auto& p : spec.professions) {
        out.lexicon_oracle.push_back({p.tgt_base, p.src});
        out.lexicon_oracle.push_back({p.tgt_base + "in", p.src});
    }
    for (const auto& v : spec.verbs) out.lexicon_oracle.push_back({v.tgt, v.src});
    for (const auto& a : spec.adjectives) out.lexicon_oracle.push_back({a.tgt, a.src});
    for (const auto& w : spec.fillers) out.lexicon_oracle.push_back({w.tgt, w.src});
    for (Gender g : {Gender::Masc, Gender::Fem, Gender::Neut}) {
        out.lexicon_oracle.push_back({pronoun_token(g), "it"});
        out.lexicon_oracle.push_back({article_token(g), "the"});
    }

    char buf[32];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.6f", v);
        return std::string(buf);
    };
    std::size_t par_sents = 0, mono_sents = 0;
    for (const auto& d : out.parallel_tgt) par_sents += d.sentences.size();
    for (const auto& d : out.mono_tgt) mono_sents += d.sentences.size();
    out.manifest = {
        {"parallel_docs", std::to_string(out.parallel_src.size())},
        {"parallel_sentences", std::to_string(par_sents)},
        {"mono_docs", std::to_string(out.mono_tgt.size())},
        {"mono_sentences", std::to_string(mono_sents)},
        {"pronoun_challenge_examples", std::to_string(out.pronoun_challenge.size())},
        {"keyword_challenge_examples", std::to_string(out.keyword_challenge.size())},
        {"gender_share_masc", fmt(spec.gender_share(Gender::Masc))},
        {"gender_share_fem", fmt(spec.gender_share(Gender::Fem))},
        {"gender_share_neut", fmt(spec.gender_share(Gender::Neut))},
        // every system's pronoun accuracy lies between these two bounds
        {"pronoun_accuracy_sentence_optimum", fmt(spec.majority_gender_rate())},
        {"pronoun_accuracy_context_oracle", fmt(1.0)},
    };
    return out;
}

void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& manifest) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write manifest: " + path);
    for (const auto& [k, v] : manifest) f << k << '\t' << v << '\n';
}

} // namespace docfuse
