#pragma once

#include "pplab/buyer.hpp"
#include "pplab/game.hpp"
#include "pplab/seller.hpp"

namespace pplab {

/// Plays one full game. Both parties are copied, so inputs are never mutated;
/// identical inputs always produce bit-identical transcripts.
inline Transcript play_game(const SellerMachine& seller, const BuyerPolicy& buyer,
                            const GameConfig& cfg) {
  cfg.validate();
  if (seller.horizon() != cfg.T)
    throw ConfigError("play_game: seller was built for a different horizon");
  if (buyer.config().T != cfg.T)
    throw ConfigError("play_game: buyer was built for a different horizon");

  SellerMachine s = seller;
  BuyerPolicy b = buyer.clone_fresh();
  Transcript tr;
  tr.rounds.reserve(std::size_t(cfg.T));
  for (std::int64_t t = 1; t <= cfg.T; ++t) {
    s.note_quote();
    const double price = s.quote();
    const bool accepted = b.decide(t, price);
    s.advance(accepted);
    tr.rounds.push_back(Round{t, price, accepted});
  }
  return tr;
}

inline GameOutcome play_and_score(const SellerMachine& seller, const BuyerPolicy& buyer,
                                  const GameConfig& cfg) {
  return score_game(play_game(seller, buyer, cfg), cfg);
}

/// Re-runs a transcript's decisions through the machine; the result must be
/// identical for a correctly deterministic seller.
inline Transcript replay_transcript(const SellerMachine& seller, const Transcript& tr,
                                    const GameConfig& cfg) {
  BuyerSpec spec;
  spec.kind = BuyerKind::Scripted;
  spec.script.reserve(tr.rounds.size());
  for (const Round& r : tr.rounds) spec.script.push_back(r.accepted);
  return play_game(seller, make_buyer(spec, seller, cfg), cfg);
}

}  // namespace pplab
