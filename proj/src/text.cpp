#include "behavior_codec/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_map>
#include <unordered_set>

namespace behavior_codec {

namespace {

constexpr std::array kStopWords = {
    "a", "about", "above", "across", "after", "afterwards", "again", "against", "ain", "all",
    "almost", "alone", "along", "already", "also", "although", "always", "am", "among", "amongst",
    "an", "and", "another", "any", "anyhow", "anyone", "anything", "anyway", "anywhere", "are",
    "aren", "around", "as", "at", "back", "be", "became", "because", "become", "becomes",
    "becoming", "been", "before", "beforehand", "behind", "being", "below", "beside", "besides",
    "between", "beyond", "both", "but", "by", "can", "cannot", "could", "couldn", "d",
    "did", "didn", "do", "does", "doesn", "doing", "don", "done", "down", "due",
    "during", "each", "eg", "eight", "either", "eleven", "else", "elsewhere", "enough", "etc",
    "even", "ever", "every", "everyone", "everything", "everywhere", "except", "few", "fifteen", "fifty",
    "first", "five", "for", "former", "formerly", "forty", "four", "from", "further", "furthermore",
    "had", "hadn", "has", "hasn", "have", "haven", "having", "he", "hence", "her",
    "here", "hereafter", "hereby", "herein", "hers", "herself", "him", "himself", "his", "how",
    "however", "hundred", "i", "ie", "if", "in", "inc", "indeed", "into", "is",
    "isn", "it", "its", "itself", "just", "last", "latter", "ll", "m", "ma",
    "many", "may", "me", "meanwhile", "might", "mightn", "mine", "more", "moreover", "most",
    "mostly", "much", "must", "mustn", "my", "myself", "namely", "needn", "neither", "never",
    "nevertheless", "next", "nine", "no", "nobody", "none", "noone", "nor", "not", "nothing",
    "now", "nowhere", "o", "of", "off", "often", "on", "once", "one", "only",
    "onto", "or", "other", "others", "otherwise", "our", "ours", "ourselves", "out", "over",
    "own", "per", "perhaps", "please", "quite", "rather", "re", "really", "s", "said",
    "same", "say", "says", "second", "seem", "seemed", "seeming", "seems", "several", "shall",
    "shan", "she", "should", "shouldn", "since", "six", "sixty", "so", "some", "somehow",
    "someone", "something", "sometime", "sometimes", "somewhere", "still", "such", "t", "ten", "than",
    "that", "the", "their", "theirs", "them", "themselves", "then", "thence", "there", "thereafter",
    "thereby", "therefore", "therein", "thereupon", "these", "they", "third", "this", "those", "though",
    "three", "through", "throughout", "thru", "thus", "to", "together", "too", "toward", "towards",
    "twelve", "twenty", "two", "under", "until", "up", "upon", "us", "ve", "very",
    "via", "was", "wasn", "we", "well", "were", "weren", "what", "whatever", "when",
    "whence", "whenever", "where", "whereafter", "whereas", "whereby", "wherein", "whereupon", "wherever", "whether",
    "which", "while", "whither", "who", "whoever", "whole", "whom", "whose", "why", "will",
    "with", "within", "without", "wouldn", "would", "y", "yes", "yet", "you",
    "your", "yours", "yourself", "yourselves", "ought", "let", "lets", "b", "c", "e",
    "f", "g", "h", "j", "k", "l", "n", "p", "q", "r",
    "u", "v", "w", "x", "z", "oh", "ok", "okay", "wo",
};

const std::unordered_set<std::string_view>& stop_set() {
  static const std::unordered_set<std::string_view> set(kStopWords.begin(), kStopWords.end());
  return set;
}

const std::unordered_map<std::string_view, std::string_view>& irregulars() {
  static const std::unordered_map<std::string_view, std::string_view> table = {
      {"am", "be"}, {"is", "be"}, {"are", "be"}, {"was", "be"}, {"were", "be"},
      {"been", "be"}, {"being", "be"}, {"has", "have"}, {"had", "have"}, {"having", "have"},
      {"does", "do"}, {"did", "do"}, {"done", "do"}, {"doing", "do"}, {"goes", "go"},
      {"went", "go"}, {"gone", "go"}, {"going", "go"}, {"made", "make"}, {"making", "make"},
      {"gave", "give"}, {"given", "give"}, {"giving", "give"}, {"took", "take"}, {"taken", "take"},
      {"taking", "take"}, {"kept", "keep"}, {"got", "get"}, {"gotten", "get"}, {"saw", "see"},
      {"seen", "see"}, {"came", "come"}, {"coming", "come"}, {"knew", "know"}, {"known", "know"},
      {"thought", "think"}, {"found", "find"}, {"told", "tell"}, {"left", "leave"}, {"felt", "feel"},
      {"brought", "bring"}, {"began", "begin"}, {"begun", "begin"}, {"held", "hold"}, {"wrote", "write"},
      {"written", "write"}, {"writing", "write"}, {"stood", "stand"}, {"heard", "hear"}, {"meant", "mean"},
      {"met", "meet"}, {"ran", "run"}, {"paid", "pay"}, {"sent", "send"}, {"built", "build"},
      {"spent", "spend"}, {"lost", "lose"}, {"fell", "fall"}, {"sold", "sell"}, {"led", "lead"},
      {"understood", "understand"}, {"chose", "choose"}, {"chosen", "choose"}, {"choosing", "choose"},
      {"bought", "buy"}, {"caught", "catch"}, {"taught", "teach"}, {"sought", "seek"}, {"dealt", "deal"},
      {"children", "child"}, {"men", "man"}, {"women", "woman"}, {"feet", "foot"}, {"teeth", "tooth"},
      {"mice", "mouse"}, {"lives", "life"}, {"wives", "wife"}, {"knives", "knife"}, {"halves", "half"},
      {"criteria", "criterion"}, {"phenomena", "phenomenon"}, {"analyses", "analysis"}, {"used", "use"},
      {"uses", "use"}, {"using", "use"}, {"caused", "cause"}, {"causing", "cause"}, {"focused", "focus"},
      {"focusing", "focus"}, {"guided", "guide"}, {"guiding", "guide"}, {"agreed", "agree"},
      {"created", "create"}, {"creating", "create"}, {"raised", "raise"}, {"raising", "raise"},
      {"changed", "change"}, {"changing", "change"}, {"changes", "change"}, {"arranged", "arrange"},
      {"ranging", "range"}, {"ranged", "range"}, {"series", "series"}, {"species", "species"},
      {"news", "news"}, {"willing", "willing"}, {"hundred", "hundred"}, {"better", "good"},
      {"best", "good"}, {"worse", "bad"}, {"worst", "bad"}, {"won", "win"}, {"winning", "win"},
      {"people", "people"}, {"bias", "bias"}, {"lying", "lie"}, {"dying", "die"}, {"tying", "tie"},
  };
  return table;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool has_vowel(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return is_vowel(c) || c == 'y'; });
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

struct ERule {
  std::string_view suffix;
  std::string_view blocked_before;  // letters right before the suffix that cancel the rule
};

// Stem endings that lost a silent e when -ing/-ed was attached.
constexpr std::array kSilentE = {
    ERule{"iz", ""},  ERule{"yz", ""},   ERule{"at", "eo"}, ERule{"bl", ""},  ERule{"pl", ""},
    ERule{"tl", ""},  ERule{"dl", ""},   ERule{"gl", ""},   ERule{"kl", ""},  ERule{"fl", ""},
    ERule{"cl", ""},  ERule{"v", ""},    ERule{"uc", ""},   ERule{"nc", ""},  ERule{"dg", ""},
    ERule{"rg", ""},  ERule{"ur", "o"},  ERule{"ar", "ea"}, ERule{"ir", "a"}, ERule{"ak", "eao"},
    ERule{"os", "o"}, ERule{"ag", ""},   ERule{"ic", ""},   ERule{"ut", "ou"}, ERule{"id", "aoi"},
    ERule{"ud", "o"}, ERule{"in", "aoei"}, ERule{"eas", ""}, ERule{"as", "aeiou"}, ERule{"u", ""},
    ERule{"ok", "o"}, ERule{"ot", "o"},  ERule{"ap", "eoa"}, ERule{"ul", "oua"}, ERule{"ns", ""},
    ERule{"rs", ""},  ERule{"ps", ""},   ERule{"rc", ""},   ERule{"ac", ""},  ERule{"ad", "eoa"},
    ERule{"il", "aoei"},
};

bool needs_silent_e(std::string_view stem) {
  for (const ERule& rule : kSilentE) {
    if (!ends_with(stem, rule.suffix) || stem.size() <= rule.suffix.size()) continue;
    const char before = stem[stem.size() - rule.suffix.size() - 1];
    if (rule.blocked_before.find(before) != std::string_view::npos) continue;
    return true;
  }
  // Short consonant-vowel-consonant stems: hop(e), bas(e), lik(e).
  if (stem.size() == 3 && !is_vowel(stem[0]) && is_vowel(stem[1]) && !is_vowel(stem[2]) &&
      std::string_view("wxy").find(stem[2]) == std::string_view::npos) {
    return true;
  }
  return false;
}

// Restores the base form after an -ing/-ed suffix was cut off.
std::string repair_stem(std::string stem) {
  const std::size_t n = stem.size();
  if (n >= 4 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) &&
      std::string_view("lsz").find(stem[n - 1]) == std::string_view::npos) {
    stem.pop_back();
    return stem;
  }
  if (needs_silent_e(stem)) stem.push_back('e');
  return stem;
}

std::string lemma_step(const std::string& w) {
  if (const auto it = irregulars().find(w); it != irregulars().end()) return std::string(it->second);
  const std::size_t n = w.size();
  if (n > 4 && (ends_with(w, "ies") || ends_with(w, "ied"))) return w.substr(0, n - 3) + "y";
  if (n > 5 && ends_with(w, "ing")) {
    const std::string stem = w.substr(0, n - 3);
    if (has_vowel(stem)) return repair_stem(stem);
    return w;
  }
  if (n > 4 && ends_with(w, "ed")) {
    if (ends_with(w, "eed")) return w;
    const std::string stem = w.substr(0, n - 2);
    if (has_vowel(stem)) return repair_stem(stem);
    return w;
  }
  if (n > 3 && ends_with(w, "es")) {
    const std::string stem = w.substr(0, n - 2);
    if (ends_with(stem, "ss") || ends_with(stem, "x") || ends_with(stem, "z") || ends_with(stem, "ch") ||
        ends_with(stem, "sh") || ends_with(stem, "us")) {
      return stem;
    }
    return w.substr(0, n - 1);
  }
  if (n > 3 && ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us") && !ends_with(w, "is")) {
    return w.substr(0, n - 1);
  }
  return w;
}

bool alphabetic(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalpha(c) != 0; });
}

}  // namespace

const std::vector<std::string_view>& stop_words() {
  static const std::vector<std::string_view> list = [] {
    std::vector<std::string_view> v(stop_set().begin(), stop_set().end());
    std::sort(v.begin(), v.end());
    return v;
  }();
  return list;
}

bool is_stop_word(std::string_view word) { return stop_set().contains(word); }

std::string lemmatize(std::string_view word) {
  std::string current(word);
  // Suffix rules shorten the word and irregular lemmas are fixed points;
  // the cap only guards against a bad table entry.
  for (int step = 0; step < 16; ++step) {
    std::string next = lemma_step(current);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

TokenizedCode preprocess(std::string_view text, std::string_view code_id) {
  TokenizedCode out;
  out.code_id = std::string(code_id);
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    if (alphabetic(token) && !is_stop_word(token)) {
      std::string lemma = lemmatize(token);
      if (!is_stop_word(lemma)) out.tokens.push_back(std::move(lemma));
    }
    token.clear();
  };
  for (unsigned char c : text) {
    if (c < 0x80 && std::isalnum(c) != 0) {
      token.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  out.empty_after_filter = out.tokens.empty();
  return out;
}

}  // namespace behavior_codec
