#pragma once

#include <string_view>

namespace salience::resources {

/// Shipped issue taxonomy (the five issue areas and their keywords).
std::string_view default_taxonomy_json();
/// Shipped English stopword list, one word per line.
std::string_view default_stopwords_text();
/// Shipped cluster-labeling prompt with {categories}, {terms}, {samples} placeholders.
std::string_view default_label_prompt();

}  // namespace salience::resources
