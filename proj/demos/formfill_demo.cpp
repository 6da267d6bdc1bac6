// Walks the form-filling session end to end and prints what the engine sends
// to the model each round under both prompting policies.

#include <iostream>

#include "tme/tme.hpp"

int main() {
  tme::SessionScript script;
  script.root_action = "Fill form";
  script.rounds = {
      {"Help me fill out a form, I will provide some of my information to you.",
       "Of course! Please provide me with the information you would like me to include in "
       "the form.",
       "Of course! Please provide me with the information you would like me to include in "
       "the form.",
       tme::IntentHint::normal},
      {"My name is John Doe.",
       "Great, thank you! What other information would you like me to include in the form.",
       "Great, thank you! What other information would you like me to include in the form.",
       tme::IntentHint::normal},
      {"My email is john@example.com.",
       "Great, thank you for sharing your email address. Can you please provide me with the "
       "rest of the information needed to fill out the form?",
       "Great, thank you for sharing your email address. Can you please provide me with the "
       "rest of the information needed to fill out the form?",
       tme::IntentHint::normal},
      {"Sorry, to correct, my name is John Smith.",
       "Got it, thank you for the correction. Please provide me with the rest of the "
       "information you would like me to include in the form.",
       "Got it, thank you for the correction. Please provide me with the rest of the "
       "information you would like me to include in the form.",
       tme::IntentHint::correction},
      {"Help to repeat my information, Then submit.",
       "Sure! Here is the information you provided. I will now submit the form.",
       "Sure! Here is the information you provided. I will now submit the form.",
       tme::IntentHint::review_submit},
  };

  tme::SessionResult result = tme::run_session(script, {});

  for (const tme::RoundRecord& round : result.rounds) {
    std::cout << "=== round " << round.round << " ===\n";
    if (round.inference)
      std::cout << "[inferred " << to_string(round.inference->label) << " -> node "
                << to_string(round.inference->target) << ": " << round.inference->rationale
                << "]\n";
    std::cout << "-- tree policy prompt --\n" << tme::render(round.prompt_tet) << "\n";
    std::cout << "-- baseline prompt --\n" << tme::render(round.prompt_baseline) << "\n\n";
  }

  std::cout << tme::render_table(result.report, tme::TableFormat::text) << "\n";
  std::cout << "final tree:\n" << tme::serialize(result.final_tree()) << "\n";
  return 0;
}
