"""Builds the pybind11 extension through the repository's CMake project."""

import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source_dir = Path(__file__).resolve().parent
        build_dir = Path(self.build_temp).resolve() / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)
        subprocess.run(
            [
                "cmake",
                str(source_dir),
                "-DCMAKE_BUILD_TYPE=Release",
                "-DKREINSPEC_BUILD_PYTHON=ON",
                # skip test targets; only the extension module is needed
                "-DSKBUILD=ON",
                f"-DPython3_EXECUTABLE={sys.executable}",
            ],
            cwd=build_dir,
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", ".", "--target", "_kreinspec", "--parallel"],
            cwd=build_dir,
            check=True,
        )
        built = sorted(build_dir.glob("_kreinspec*.so")) + sorted(
            build_dir.glob("_kreinspec*.pyd")
        )
        if not built:
            raise RuntimeError("CMake did not produce the extension module")
        target = Path(self.get_ext_fullpath(ext.name)).resolve()
        target.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(built[0], target)


setup(
    packages=["kreinspec"],
    package_dir={"kreinspec": "python/kreinspec"},
    ext_modules=[CMakeExtension("kreinspec._kreinspec")],
    cmdclass={"build_ext": CMakeBuild},
)
