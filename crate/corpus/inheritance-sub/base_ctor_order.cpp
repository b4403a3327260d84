int trace = 0;
struct A {
  int a;
  A() { a = 1; trace = trace * 10 + 1; }
};
struct B : A {
  int b;
  B() { b = a + 1; trace = trace * 10 + 2; }
};
struct C : B {
  int c;
  C() { c = b + 1; trace = trace * 10 + 3; }
};
int main() {
  C obj;
  assert(obj.a == 1 && obj.b == 2 && obj.c == 3);
  assert(trace == 123);
  return 0;
}
