#include "avr/agent/agent.hpp"
#include "avr/core/criteria.hpp"
#include "avr/core/errors.hpp"

namespace avr::agent {

namespace {

const std::vector<std::string> kBase{
    "Be contained in a single HTML file.",
    "You can use HTML5 Canvas and any javascript library via CDN (e.g., Phaser, Three.js, PixiJS, Babylon.js, "
    "Matter.js).",
    "Assume that the user does not have a GPU; the code should run well on CPUs.",
    "Have clear, well-commented code with meaningful variable names.",
    "Implement smooth animations for all moving elements.",
    "Include a title screen with a large button that has id='start-button'. Pressing 'enter' or clicking the button "
    "should press the button and start the {content-type}. Ensure that audio only starts after pressing the start "
    "button.",
    "DO NOT use alerts (e.g., alert(\"Game Over!\"))",
};

const std::vector<std::string> kGame{
    "Include AI to control the player by default; it should play the game in a smart way.",
    "Allow switching to human control when F4 is pressed.",
    "Include game state management and responsive control.",
    "No broken behaviors (softlock, hardlock, hitbox bugs, clipping, AI breakdown, etc.).",
    "Use clear, visually distinct elements for game objects.",
    "Ensure visual feedback for player actions and game events.",
    "Use appropriate colors and visual effects to enhance gameplay.",
    "Maintain consistent visual style throughout the game.",
    "Include background music that fits the theme and mood of the game.",
    "Add sound effects for key game events (jumps, collisions, item collection).",
    "Implement audio controls (mute/unmute) with the 'M' key.",
    "Ensure audio volume is balanced and not overwhelming.",
};

const std::vector<std::string> kAnimation{
    "Include interesting visual elements and transitions.",
    "Focus on aesthetic appeal.",
    "Respect physical laws if relevant to the requested animation.",
    "No broken behaviors (jank, broken keyframes, hitbox bugs, clipping, etc.).",
    "Create visually appealing elements with attention to detail.",
    "Implement appropriate visual effects to enhance the animation.",
    "Ensure consistent visual style throughout the animation.",
    "Use color and composition effectively to convey mood and theme.",
    "Include background music that complements the animation's mood and pace.",
    "Add sound effects for key animation events and transitions.",
    "Implement audio controls (mute/unmute) with the 'M' key.",
    "Synchronize audio timing with visual elements.",
};

}  // namespace

GuidelineSet build_guidelines(ContentKind kind) {
  return {kBase, kind == ContentKind::game ? kGame : kAnimation};
}

GuidelineSet build_guidelines(std::string_view kind_token) { return build_guidelines(parse_content_kind(kind_token)); }

std::string GuidelineSet::render(ContentKind kind) const {
  const std::string word(content_type_word(kind));
  auto expand = [&](std::string line) {
    for (auto pos = line.find("{content-type}"); pos != std::string::npos; pos = line.find("{content-type}"))
      line.replace(pos, 14, word);
    return line;
  };
  std::string out;
  for (const auto& l : base) out += "- " + expand(l) + "\n";
  for (const auto& l : kind_specific) out += "- " + expand(l) + "\n";
  return out;
}

}  // namespace avr::agent
