#include "cvplan/registry/tool_registry.hpp"

namespace cvplan::registry {

namespace {

// clahe and histeq are the dictionary entries as published; the rest follow
// the same layout. tf2_segmentation runs as the threshold segmenter.
constexpr std::string_view kBuiltinDictionary = R"json({
  "reader": {
    "info": {
      "agent_input_def": {},
      "agent_output_def": {
        "image": {
          "type": "image_compressed_numpy"
        }
      },
      "agent_parameter_def": {
        "csv_path": {
          "optional": false
        },
        "header_params": {
          "optional": true
        }
      }
    },
    "path": "simplemind/agent/reader/csv_reader.py"
  },
  "save_image": {
    "info": {
      "agent_input_def": {
        "input_1": {
          "alternate_names": [
            "input",
            "image"
          ],
          "optional": false,
          "type": "image_compressed_numpy"
        },
        "input_2": {
          "alternate_names": [
            "mask"
          ],
          "optional": true,
          "type": "mask_compressed_numpy"
        }
      },
      "agent_output_def": {
        "file": {
          "type": "file_path"
        }
      },
      "agent_parameter_def": {
        "output_filename": {
          "optional": false
        },
        "mask_alpha": {
          "optional": true
        }
      }
    },
    "path": "simplemind/agent/image_processing/save_image.py"
  },
  "resize": {
    "info": {
      "agent_input_def": {
        "input": {
          "alternate_names": [
            "image"
          ],
          "optional": false,
          "type": "image_compressed_numpy"
        }
      },
      "agent_output_def": {
        "image": {
          "type": "image_compressed_numpy"
        }
      },
      "agent_parameter_def": {
        "target_shape": {
          "optional": false
        },
        "order": {
          "optional": true
        },
        "preserve_range": {
          "optional": true
        },
        "anti_aliasing": {
          "optional": true
        },
        "numpy_only": {
          "optional": false
        }
      },
      "param_format": {
        "target_shape": {
          "format": "stringified_list",
          "length": 2,
          "element": "positive_integer"
        }
      }
    },
    "path": "simplemind/agent/image_processing/resize.py"
  },
  "expand_channels": {
    "info": {
      "agent_input_def": {
        "input": {
          "alternate_names": [
            "image"
          ],
          "optional": false,
          "type": "image_compressed_numpy"
        }
      },
      "agent_output_def": {
        "image": {
          "type": "image_compressed_numpy"
        }
      },
      "agent_parameter_def": {
        "number_of_channels": {
          "optional": false
        },
        "numpy_only": {
          "optional": false
        }
      }
    },
    "path": "simplemind/agent/image_processing/expand_channels.py"
  },
  "clahe": {
    "info": {
      "agent_input_def": {
        "input": {
          "alternate_names": [
            "image"
          ],
          "optional": false,
          "type": "image_compressed_numpy"
        }
      },
      "agent_output_def": {
        "image": {
          "type": "image_compressed_numpy"
        }
      },
      "agent_parameter_def": {
        "channel": {
          "optional": true
        },
        "clip_limit": {
          "optional": false
        },
        "nbins": {
          "optional": false
        },
        "numpy_only": {
          "optional": false
        }
      }
    },
    "path": "simplemind/agent/image_processing/clahe.py"
  },
  "histeq": {
    "info": {
      "agent_input_def": {
        "input": {
          "alternate_names": [
            "image"
          ],
          "optional": false,
          "type": "image_compressed_numpy"
        }
      },
      "agent_output_def": {
        "image": {
          "type": "image_compressed_numpy"
        }
      },
      "agent_parameter_def": {
        "channel": {
          "optional": false
        },
        "nbins": {
          "optional": false
        },
        "numpy_only": {
          "optional": false
        }
      }
    },
    "path": "simplemind/agent/image_processing/histeq.py"
  },
  "z_score": {
    "info": {
      "agent_input_def": {
        "input": {
          "alternate_names": [
            "image"
          ],
          "optional": false,
          "type": "image_compressed_numpy"
        }
      },
      "agent_output_def": {
        "image": {
          "type": "image_compressed_numpy"
        }
      },
      "agent_parameter_def": {
        "channel": {
          "optional": true
        },
        "numpy_only": {
          "optional": false
        }
      }
    },
    "path": "simplemind/agent/image_processing/z_score.py"
  },
  "tf2_segmentation": {
    "info": {
      "agent_input_def": {
        "input_1": {
          "alternate_names": [
            "image"
          ],
          "optional": false,
          "type": "image_compressed_numpy"
        },
        "input_2": {
          "alternate_names": [
            "preprocessed_image"
          ],
          "optional": false,
          "type": "image_compressed_numpy"
        }
      },
      "agent_output_def": {
        "mask": {
          "type": "mask_compressed_numpy"
        }
      },
      "agent_parameter_def": {
        "prediction_threshold": {
          "optional": false
        },
        "settings_yaml": {
          "optional": true
        },
        "working_dir": {
          "optional": true
        },
        "weights_path": {
          "optional": true
        },
        "weights_url": {
          "optional": true
        }
      },
      "trainable": true
    },
    "path": "simplemind/agent/nn/tf2/engine/segmentation.py"
  },
  "decision_tree": {
    "info": {
      "agent_input_def": {
        "input": {
          "alternate_names": [
            "mask"
          ],
          "optional": false,
          "type": "mask_compressed_numpy"
        }
      },
      "agent_output_def": {
        "mask": {
          "type": "mask_compressed_numpy"
        }
      },
      "agent_parameter_def": {
        "rules": {
          "optional": true
        }
      }
    },
    "path": "simplemind/agent/reasoning/decision_tree.py"
  },
  "candidate_selector": {
    "info": {
      "agent_input_def": {
        "input": {
          "alternate_names": [
            "mask"
          ],
          "optional": false,
          "type": "mask_compressed_numpy"
        }
      },
      "agent_output_def": {
        "mask": {
          "type": "mask_compressed_numpy"
        }
      },
      "agent_parameter_def": {
        "selection": {
          "optional": true
        }
      },
      "requires_agents": [
        "decision_tree"
      ]
    },
    "path": "simplemind/agent/reasoning/candidate_selector.py"
  }
}
)json";

}  // namespace

std::string_view builtin_registry_text() { return kBuiltinDictionary; }

const ToolRegistry& builtin_registry() {
  static const ToolRegistry registry = load_registry(kBuiltinDictionary);
  return registry;
}

}  // namespace cvplan::registry
