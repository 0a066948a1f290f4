"""测试字典工具函数"""

import pytest

from germrenorm.common.dicts import decode_index, deep_merge, drop_none, encode_index


class TestDeepMerge:
    """deep_merge 函数测试类"""

    def test_basic_merge_different_sections(self):
        """测试基本合并 - 不同配置段"""
        base = {"quadrature": {"t_level": 3}}
        update = {"engine": {"jobs": 4}}

        result = deep_merge(base, update)
        assert result == {"quadrature": {"t_level": 3}, "engine": {"jobs": 4}}
        # 确保原字典未被修改
        assert base == {"quadrature": {"t_level": 3}}
        assert update == {"engine": {"jobs": 4}}

    def test_cli_override_keeps_file_values(self):
        """测试命令行覆盖只替换给定的键"""
        base = {"quadrature": {"t_level": 3, "hermite_order": 20, "seed": 1}}
        update = {"quadrature": {"t_level": 5}}

        result = deep_merge(base, update)
        assert result == {"quadrature": {"t_level": 5, "hermite_order": 20, "seed": 1}}

    def test_deep_merge_multiple_levels(self):
        """测试多层嵌套深度合并"""
        base = {"geometry": {"metric": {"rows": 2}, "dim": 4}}
        update = {"geometry": {"metric": {"cols": 2}}}

        result = deep_merge(base, update)
        assert result == {"geometry": {"metric": {"rows": 2, "cols": 2}, "dim": 4}}

    def test_empty_dictionaries(self):
        """测试空字典处理"""
        assert deep_merge({}, {"a": 1}) == {"a": 1}
        assert deep_merge({"a": 1}, {}) == {"a": 1}
        assert deep_merge({}, {}) == {}

    def test_type_conflicts(self):
        """测试字典与非字典类型冲突"""
        assert deep_merge({"engine": {"jobs": 1}}, {"engine": "off"}) == {"engine": "off"}
        assert deep_merge({"engine": "off"}, {"engine": {"jobs": 1}}) == {"engine": {"jobs": 1}}
        assert deep_merge({"a": [1, 2]}, {"a": [3]}) == {"a": [3]}

    def test_nested_values_are_copied(self):
        """测试结果与输入不共享嵌套对象"""
        update = {"geometry": {"metric": [[1.0, 0.0], [0.0, 1.0]]}}
        result = deep_merge({}, update)
        result["geometry"]["metric"][0][0] = 2.0
        assert update["geometry"]["metric"][0][0] == 1.0

    def test_unicode_keys(self):
        """测试Unicode键名"""
        result = deep_merge({"中文": {"测试": "值1"}}, {"中文": {"新键": "值2"}, "σ": 1})
        assert result == {"中文": {"测试": "值1", "新键": "值2"}, "σ": 1}


class TestDropNone:
    """drop_none 函数测试类"""

    def test_drops_missing_flags(self):
        """测试未给出的命令行参数被移除"""
        flags = {"quadrature": {"t_level": None, "seed": 7}, "engine": {"jobs": None}}
        assert drop_none(flags) == {"quadrature": {"seed": 7}, "engine": {}}

    def test_keeps_falsy_values(self):
        """测试保留0、False和空字符串"""
        flags = {"order": 0, "rich": False, "file": "", "mass": None}
        assert drop_none(flags) == {"order": 0, "rich": False, "file": ""}


class TestIndexKeys:
    """多重指标与JSON键之间的转换"""

    @pytest.mark.parametrize("alpha", [(), (0,), (0, 2), (3, 1, 4)])
    def test_encode_then_decode(self, alpha):
        """测试编码后解码得到原指标"""
        assert decode_index(encode_index(alpha)) == alpha

    def test_compact_form(self):
        """测试编码格式紧凑"""
        assert encode_index((0, 2)) == "[0,2]"
        assert decode_index("[0, 2]") == (0, 2)

    @pytest.mark.parametrize("key", ['{"a": 1}', "[-1, 0]", "[1.5]", '"x"'])
    def test_invalid_keys(self, key):
        """测试非法键"""
        with pytest.raises(ValueError, match="invalid multi-index key"):
            decode_index(key)
