#include "cvplan/planner/prompt.hpp"

namespace cvplan::planner {

namespace {

constexpr const char* kIntroduction = R"(You write image-analysis plans for a tool-based vision engine.
Reply with one JSON object whose only top-level key is "chunks". Reuse the
layout of the example plan; any agent from the dictionary with the same
input and output types may stand in for one used there. The first supernode
must load the images with a `reader` agent.)";

constexpr const char* kGuidelines = R"(1. Nesting: "chunks" maps supernode names to supernodes; a supernode maps
   chunk names to chunks; a chunk holds its input keys and an "agents" object;
   "agents" maps agent names to objects of parameters.
2. Inputs: a chunk reads other data through `input` (one source) or
   `input_1`, `input_2`, ... (several). The value is a supernode name, or
   "from <chunk>" for a chunk of the same supernode.
3. Agents run top to bottom inside a chunk: the first agent receives the chunk
   inputs in slot order, every later agent receives the previous agent's
   result first and then input_2, input_3, ... of the chunk.
4. Types must line up: an agent's inputs expect either an image or a mask, as
   listed under "agent_input_def" in the dictionary, and a producer's type is
   listed under "agent_output_def".
5. Agent names must come from the dictionary. Give every parameter marked
   "optional": false; only use parameters the dictionary lists.
6. `supernode_output: true` and `chunk_output: true` are flags written inside
   the agent whose result is exported. They are never agents themselves. A
   supernode that other supernodes read needs exactly one supernode_output.
7. Shapes and other list values are quoted strings: "target_shape": "[512, 512]",
   never a bare [512, 512]. The reader takes "csv_path": "__input_images__" and
   "header_params": "__header_params__".)";

constexpr const char* kExample = R"({
  "chunks": {
    "chest_xr_image": {
      "load_image": {
        "agents": {
          "reader": {
            "csv_path": "__input_images__",
            "header_params": "__header_params__",
            "supernode_output": true
          },
          "save_image": {
            "output_filename": "chest_xr_input_image"
          }
        }
      }
    },
    "trachea_chest_xr": {
      "image_processing": {
        "input": "chest_xr_image",
        "agents": {
          "resize": {
            "target_shape": "[512, 512]",
            "order": 3,
            "preserve_range": true,
            "anti_aliasing": true,
            "numpy_only": true
          },
          "expand_channels": {
            "number_of_channels": 1,
            "numpy_only": true
          },
          "clahe": {
            "nbins": 256,
            "clip_limit": 0.03,
            "channel": 0,
            "numpy_only": true
          },
          "z_score": {
            "channel": 0,
            "numpy_only": true
          }
        }
      }
    }
  }
})";

constexpr const char* kPreface =
    "Looking at the json guideline, json example, and json dictionary, please generate an example for:";

}  // namespace

std::string default_introduction() { return kIntroduction; }
std::string default_guidelines() { return kGuidelines; }
std::string default_example() { return kExample; }
std::string default_preface() { return kPreface; }

}  // namespace cvplan::planner
