from .io import Example, DataFormatError, load_dataset, save_dataset
from .fewshot import build_few_shot

__all__ = ["Example", "DataFormatError", "load_dataset", "save_dataset", "build_few_shot"]
