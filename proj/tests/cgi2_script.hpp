#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "orsum/cgi2.hpp"
#include "orsum/corpus.hpp"

namespace orsum::testing {

inline PaperRecord synthetic_paper(const std::string& id, std::size_t reviewers) {
  PaperRecord p;
  p.id = id;
  p.title = "Synthetic paper " + id;
  p.abstract = "An abstract for " + id + ".";
  p.decision = Decision::accept();
  for (std::size_t i = 0; i < reviewers; ++i) {
    Review r;
    r.reviewer_id = "R" + std::to_string(i + 1);
    r.text = "Review " + std::to_string(i + 1) + " of " + id + " says the method is sound but evaluation is thin.";
    p.reviews.push_back(r);
  }
  p.metareview = "A gold meta-review for " + id + " with enough words to pass the length filter easily here.";
  return p;
}

inline std::string opinion_reply(const std::string& who) {
  return "1. Aspect: soundness\n   Sentiment: positive\n   Statement: The method is sound.\n"
         "   Evidence: " + who + " says so.";
}

// Script that drives a well-formed CGI2 run and checks each outgoing
// message: raw reviews in order, then the checklist questions in order.
inline nlohmann::json cgi2_script(const PaperRecord& paper, const cgi2::Checklist& checklist, int iterations) {
  using nlohmann::json;
  const auto labels = reviewer_labels(paper);
  json s = json::array();
  for (const auto& who : labels)
    s.push_back({{"expect_substring", "review by " + who}, {"reply", opinion_reply(who)}});
  std::string all;
  for (std::size_t i = 0; i < labels.size(); ++i) all += (i ? ", " : "") + labels[i];
  s.push_back({{"expect_substring", "strengths and weaknesses"},
               {"reply", "Strengths:\n1. Statement: Sound method.\n   Reviewers: " + all +
                             "\n   Evidence: all agree.\nWeaknesses:\nnone"}});
  const std::string against = labels.size() > 1 ? labels.back() : "";
  std::string cc = "Consensus:\n";
  if (labels.size() > 1)
    cc += "1. Statement: Sound method.\n   Reviewers: " + all + "\n   Evidence: all agree.\n";
  else
    cc += "none\n";
  cc += "Controversy:\nnone";
  s.push_back({{"expect_substring", "consensuses"}, {"reply", cc}});
  s.push_back({{"expect_substring", "The decision for this paper is acceptance"},
               {"reply", "Initial draft for " + paper.id + "."}});
  for (int it = 1; it <= iterations; ++it) {
    for (const auto& item : checklist) {
      const std::string tag = std::to_string(it) + "." + std::to_string(item.position);
      s.push_back({{"expect_substring", item.for_decision("acceptance")}, {"reply", "Feedback " + tag + "."}});
      s.push_back({{"expect_substring", "Revise the meta-review"},
                   {"reply", "Revised draft " + tag + " for " + paper.id + "."}});
    }
  }
  return s;
}

inline cgi2::Checklist numbered_checklist(std::size_t k) {
  cgi2::Checklist c;
  for (std::size_t i = 1; i <= k; ++i)
    c.push_back({i, "Question " + std::to_string(i) + " about the acceptance/rejection decision?"});
  return c;
}

}  // namespace orsum::testing
