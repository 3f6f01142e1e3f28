#ifndef TREESOBOL_SERIALIZE_HPP
#define TREESOBOL_SERIALIZE_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "treesobol/domain.hpp"

namespace treesobol {

// JSON on disk. An ensemble file is
//   {"domain": {"lo": [...], "hi": [...]}, "trees": [<node>, ...]}
// where <node> is {"split": {"dim": k, "cut": c}, "left": <node>,
// "right": <node>} or {"leaf": mu}. Split dims are 1-based in files.
// A posterior file replaces "trees" with
//   "draws": [{"sigma": s, "trees": [...]}, ...].
//
// Loaders throw std::runtime_error with a diagnostic that names the
// failure class: "malformed ensemble file", "dimension mismatch", or
// "degenerate split".

Ensemble load_ensemble(const std::string& path);
Ensemble read_ensemble_json(const std::string& text);
void save_ensemble(const Ensemble& ens, const std::string& path);
std::string ensemble_to_json(const Ensemble& ens);

std::vector<PosteriorDraw> load_posterior(const std::string& path);
std::vector<PosteriorDraw> read_posterior_json(const std::string& text);
void save_posterior(const std::vector<PosteriorDraw>& draws, const std::string& path);
std::string posterior_to_json(const std::vector<PosteriorDraw>& draws);

// true when the file's top-level object carries per-draw ensembles
bool is_posterior_file(const std::string& path);

}  // namespace treesobol

#endif  // TREESOBOL_SERIALIZE_HPP
