#include "cbd/error.hpp"
#include "cbd/preprocess.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace cbd;

namespace {

PreprocessConfig config_with(bool use_slang) {
    PreprocessConfig c;
    c.use_slang = use_slang;
    c.lexicon = std::make_shared<SlangLexicon>(load_lexicon(std::string(CBD_DATA_DIR) + "/slang_corpus.tsv"));
    return c;
}

const Lemmatizer& rules_only() {
    static const Lemmatizer l(Lemmatizer::defaults().rules(), {});
    return l;
}

}  // namespace

TEST(Normalize, AppliesEveryRule) {
    const auto cfg = config_with(false);
    EXPECT_EQ(normalize("Check THIS http://x.co/ab @user \xF0\x9F\x98\x80", cfg), "check this");
    EXPECT_EQ(normalize("", cfg), "");
    EXPECT_EQ(normalize("plain text", cfg), "plain text");
}

TEST(Normalize, HashtagWordIsKept) {
    const auto cfg = config_with(false);
    EXPECT_EQ(normalize("I love #Gardening ##now", cfg), "i love gardening now");
    EXPECT_EQ(normalize("# alone", cfg), "alone");
}

TEST(Normalize, UrlsAreMatchedCaseInsensitively) {
    const auto cfg = config_with(false);
    EXPECT_EQ(normalize("see HTTPS://Example.com and www.foo.org now", cfg), "see and now");
}

TEST(Normalize, EmojiSplitWordsAndZwjSequencesVanish) {
    const auto cfg = config_with(false);
    // woman-technologist: U+1F469 U+200D U+1F4BB; heart U+2764 U+FE0F
    EXPECT_EQ(normalize("hi\xF0\x9F\x91\xA9\xE2\x80\x8D\xF0\x9F\x92\xBBthere \xE2\x9D\xA4\xEF\xB8\x8F", cfg), "hi there");
}

TEST(Normalize, RuleTogglesAreRespected) {
    auto cfg = config_with(false);
    cfg.strip_urls = false;
    cfg.strip_mentions = false;
    cfg.strip_emojis = false;
    EXPECT_EQ(normalize("@Bob http://x.co \xF0\x9F\x98\x80", cfg), "@bob http://x.co \xF0\x9F\x98\x80");
}

TEST(Normalize, NonEmojiUnicodeIsPreserved) {
    const auto cfg = config_with(false);
    EXPECT_EQ(normalize("caf\xC3\xA9   ol\xC3\xA9", cfg), "caf\xC3\xA9 ol\xC3\xA9");
}

TEST(Normalize, IsIdempotentOnRandomText) {
    const auto cfg = config_with(false);
    const std::vector<std::string> pieces = {"Hello", "WORLD", "#tag", "@user", "http://a.b/c", "www.x.y", "#@mix",
                                             "\xF0\x9F\x98\x80", "\xE2\x80\x8D", "#", "@", "H#TTP://z", "sob,",
                                             " ", "\t", "\n", "caf\xC3\xA9", "!!", "\xE2\x98\x80", "x"};
    oracle::TestRng rng(3);
    for (int n = 0; n < 2000; ++n) {
        std::string text;
        const std::size_t k = rng.below(10);
        for (std::size_t i = 0; i < k; ++i) text += pieces[rng.below(pieces.size())];
        const std::string once = normalize(text, cfg);
        EXPECT_EQ(normalize(once, cfg), once) << text;
        EXPECT_EQ(once.find("  "), std::string::npos);
        if (!once.empty()) {
            EXPECT_NE(once.front(), ' ');
            EXPECT_NE(once.back(), ' ');
        }
    }
}

TEST(LemmatizeToken, InflectionsOfCry) {
    for (const char* w : {"crying", "cried", "cry", "cries"}) {
        EXPECT_EQ(Lemmatizer::defaults().lemmatize(w), "cry") << w;
        EXPECT_EQ(rules_only().lemmatize(w), "cry") << "rules only: " << w;
    }
}

TEST(LemmatizeToken, UndoublesConsonantAfterIng) {
    // -ing drops to "runn"; the doubled n is undoubled.
    EXPECT_EQ(rules_only().lemmatize("running"), "run");
    EXPECT_EQ(rules_only().lemmatize("stopped"), "stop");
    // l, s and z stay doubled.
    EXPECT_EQ(rules_only().lemmatize("falling"), "fall");
    EXPECT_EQ(rules_only().lemmatize("kissing"), "kiss");
}

TEST(LemmatizeToken, SibilantAndPluralRules) {
    EXPECT_EQ(rules_only().lemmatize("classes"), "class");
    EXPECT_EQ(rules_only().lemmatize("boxes"), "box");
    EXPECT_EQ(rules_only().lemmatize("watches"), "watch");
    EXPECT_EQ(rules_only().lemmatize("cats"), "cat");
    EXPECT_EQ(rules_only().lemmatize("kiss"), "kiss");
    EXPECT_EQ(rules_only().lemmatize("famous"), "famous");
    EXPECT_EQ(rules_only().lemmatize("this"), "this");
}

TEST(LemmatizeToken, MinimumStemProtectsShortWords) {
    EXPECT_EQ(rules_only().lemmatize("its"), "its");
    EXPECT_EQ(rules_only().lemmatize("thing"), "thing");
    EXPECT_EQ(rules_only().lemmatize("red"), "red");
    EXPECT_EQ(rules_only().lemmatize("a"), "a");
}

TEST(LemmatizeToken, ExceptionsWinOverRules) {
    std::map<std::string, std::string, std::less<>> exc = {{"went", "go"}};
    EXPECT_EQ(lemmatize_token("went", {}, exc), "go");
    EXPECT_EQ(lemmatize_token("cries", {{"ies", "y", 2, false}}, {{"cries", "weep"}}), "weep");
}

TEST(LemmatizeToken, NeverEmptyNeverMuchLonger) {
    oracle::TestRng rng(5);
    const std::string alphabet = "abcdeilnorsty";
    for (int n = 0; n < 5000; ++n) {
        std::string tok;
        const std::size_t len = 1 + rng.below(9);
        for (std::size_t i = 0; i < len; ++i) tok += alphabet[rng.below(alphabet.size())];
        const std::string lemma = Lemmatizer::defaults().lemmatize(tok);
        EXPECT_FALSE(lemma.empty()) << tok;
        EXPECT_LE(lemma.size(), tok.size() + 1) << tok;
    }
}

TEST(LemmaRules, ShippedFileMatchesCompiledDefaults) {
    const auto file = load_lemma_rules(std::string(CBD_DATA_DIR) + "/lemma_rules.tsv");
    EXPECT_EQ(file.rules().size(), Lemmatizer::defaults().rules().size());
    EXPECT_EQ(file.exceptions(), Lemmatizer::defaults().exceptions());
    EXPECT_EQ(file.fingerprint(), Lemmatizer::defaults().fingerprint());
}

TEST(LemmaRules, ParsesRulesAndExceptions) {
    const auto l = parse_lemma_rules("# c\n-ies\ty\t2\n-ing\t\t3\tundouble\nwent\tgo\n");
    ASSERT_EQ(l.rules().size(), 2u);
    EXPECT_EQ(l.rules()[1].replacement, "");
    EXPECT_TRUE(l.rules()[1].undouble_consonant);
    EXPECT_EQ(l.lemmatize("went"), "go");
    EXPECT_EQ(l.lemmatize("running"), "run");
}

TEST(LemmaRules, RejectsInvariantViolations) {
    EXPECT_THROW(parse_lemma_rules("-s\t\t1\n"), DataError);          // min stem < 2
    EXPECT_THROW(parse_lemma_rules("-\tx\t2\n"), DataError);          // empty suffix
    EXPECT_THROW(parse_lemma_rules("-s\txyz\t2\n"), DataError);       // grows by 2
    EXPECT_THROW(parse_lemma_rules("-s\t\tabc\n"), DataError);        // not a number
    EXPECT_THROW(parse_lemma_rules("go\tgoing-far\n"), DataError);    // exception too long
    EXPECT_THROW(parse_lemma_rules("went\tgo\nwent\tgone\n"), DataError);
}

TEST(PreprocessText, ExpandsSlangThenTokenizesPunctuation) {
    EXPECT_EQ(preprocess_text("You MOFO!!", config_with(true)), "you m*****f*****r !!");
    EXPECT_EQ(preprocess_text("You MOFO!!", config_with(false)), "you mofo !!");
    EXPECT_EQ(preprocess_text("", config_with(true)), "");
    EXPECT_EQ(preprocess_text("", config_with(false)), "");
}

TEST(PreprocessText, LowercasingPrecedesExpansion) {
    EXPECT_EQ(preprocess_text("SOB", config_with(true)), "son of a b***h");
}

TEST(PreprocessText, ExpansionPrecedesLemmatization) {
    // "kms" expands to "kill myself"; had lemmatization come first nothing
    // would change, so this also pins the token-level order.
    EXPECT_EQ(preprocess_text("Stop crying, KMS", config_with(true)), "stop cry , kill myself");
    // Mask tokens are not lemmatized.
    EXPECT_EQ(preprocess_text("sluts", config_with(true)), "s**ts");
}

TEST(PreprocessText, RequiresLexiconWhenSlangEnabled) {
    PreprocessConfig cfg;
    cfg.use_slang = true;
    EXPECT_THROW(preprocess_text("x", cfg), ConfigError);
    cfg.use_slang = false;
    EXPECT_EQ(preprocess_text("Cats", cfg), "cat");
}

TEST(PreprocessText, AblationAddsNoExpansionText) {
    const auto cfg = config_with(false);
    oracle::TestRng rng(17);
    const auto& entries = cfg.lexicon->entries();
    const std::vector<std::string> filler = {"the", "park", "is", "nice", "today", "we", "walked", "home"};
    for (int n = 0; n < 300; ++n) {
        std::string text;
        for (int w = 0; w < 6; ++w) {
            text += rng.below(2) ? entries[rng.below(entries.size())].term : filler[rng.below(filler.size())];
            text += ' ';
        }
        const std::string out = preprocess_text(text, cfg);
        for (const auto& e : entries) {
            if (e.expansion.find(' ') == std::string::npos && e.expansion.find('*') == std::string::npos) continue;
            if (text.find(e.expansion) == std::string::npos)
                EXPECT_EQ(out.find(e.expansion), std::string::npos) << text << " -> " << out;
        }
    }
}

TEST(PreprocessText, Deterministic) {
    const auto cfg = config_with(true);
    const std::string text = "@bob u r such a loser lol http://t.co/x #fail \xF0\x9F\x98\x82";
    EXPECT_EQ(preprocess_text(text, cfg), preprocess_text(text, cfg));
}
