#include "salience/resources.hpp"

#include "salience/embedded_resources.hpp"

namespace salience::resources {

std::string_view default_taxonomy_json() { return embedded::taxonomy_default_json; }
std::string_view default_stopwords_text() { return embedded::stopwords_en_txt; }
std::string_view default_label_prompt() { return embedded::label_prompt_txt; }

}  // namespace salience::resources
