import glob

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

core_sources = sorted(s for s in glob.glob("src/*.cpp"))

ext = Pybind11Extension(
    "clm._clm",
    core_sources,
    include_dirs=["include", "vendor"],
    libraries=["png"],
    cxx_std=20,
    extra_compile_args=["-O3"],
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
